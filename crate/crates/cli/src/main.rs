fn main() {
    std::process::exit(roboviz_cli::run(std::env::args_os()));
}
