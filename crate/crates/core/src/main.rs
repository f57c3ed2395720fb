fn main() {
    let outcome = adaptive_eps::cli::run_cli(std::env::args_os());
    print!("{}", outcome.stdout);
    for line in &outcome.diagnostics {
        eprintln!("{line}");
    }
    std::process::exit(outcome.exit_code);
}
