fn main() {
    std::process::exit(adaptrial::run(std::env::args_os()));
}
