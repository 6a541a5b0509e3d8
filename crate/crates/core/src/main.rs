fn main() {
    std::process::exit(restartkit::cli::main_entry());
}
