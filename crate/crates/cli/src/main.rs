fn main() {
    std::process::exit(kersize_cli::run(std::env::args_os()));
}
