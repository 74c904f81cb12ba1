fn main() {
    std::process::exit(nk_lfm::cli::run(std::env::args_os()));
}
