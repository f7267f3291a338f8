fn main() {
    std::process::exit(vasotrans_cli::run(std::env::args_os()));
}
