fn main() {
    std::process::exit(odsel::cli::main_entry());
}
