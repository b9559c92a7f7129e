fn main() {
    std::process::exit(torus_lab::cli::run_cli(std::env::args_os()));
}
