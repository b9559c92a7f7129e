//! Drive the command-line front end in process with a bundled config.

use std::path::Path;

fn main() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/weyl_lebesgue.json");
    let out = std::env::temp_dir().join("torus-lab-example");
    let args = [
        "torus-lab",
        "weyl",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    let code = torus_lab::cli::run_cli(args);
    println!("exit code {code}");
    for name in ["manifest.json", "weyl.csv", "del.csv"] {
        let text = std::fs::read_to_string(out.join(name)).unwrap_or_default();
        println!("--- {name}\n{}", text.lines().take(4).collect::<Vec<_>>().join("\n"));
    }
}
