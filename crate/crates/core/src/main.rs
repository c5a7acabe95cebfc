fn main() {
    std::process::exit(bosonband::cli::run(std::env::args_os()));
}
