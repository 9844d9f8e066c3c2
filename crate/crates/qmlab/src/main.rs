fn main() {
    std::process::exit(qmlab::run(std::env::args_os()));
}
