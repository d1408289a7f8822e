fn main() {
    std::process::exit(levy_heat::cli::run(std::env::args_os()));
}
