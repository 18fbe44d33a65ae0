fn main() {
    std::process::exit(tetraframe::cli::run(std::env::args_os()));
}
