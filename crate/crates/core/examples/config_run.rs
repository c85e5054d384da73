//! Drive a run from a TOML configuration, as the command line tool does.

use ctig::io::parse_config_str;
use ctig::runner::execute;
use ctig::Result;

const CONFIG: &str = r#"
experiment = "distance"
seed = 3

[model]
horizon = 200.0

[distance]
iters = 4
pairs = 3
"#;

pub fn run_example(out: &std::path::Path) -> Result<Vec<std::path::PathBuf>> {
    let mut cfg = parse_config_str(CONFIG)?;
    cfg.out = out.to_path_buf();
    Ok(execute(&cfg)?.written)
}

fn main() -> Result<()> {
    for path in run_example(&std::env::temp_dir().join("ctig-config-example"))? {
        println!("{}", path.display());
    }
    Ok(())
}
