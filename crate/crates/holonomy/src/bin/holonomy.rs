fn main() {
    std::process::exit(holonomy::cli::run());
}
