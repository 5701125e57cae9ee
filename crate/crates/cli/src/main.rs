fn main() {
    std::process::exit(segtrack_cli::run(std::env::args_os()));
}
