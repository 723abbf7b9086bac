fn main() {
    std::process::exit(surf_core::cli::run(std::env::args_os()));
}
