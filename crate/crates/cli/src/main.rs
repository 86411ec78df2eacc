fn main() {
    std::process::exit(erelab_cli::run(std::env::args_os()));
}
