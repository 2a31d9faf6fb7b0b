fn main() {
    std::process::exit(kamlab::run(std::env::args_os()));
}
