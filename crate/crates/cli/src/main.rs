fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(adiabaton_cli::run_command(&args));
}
