fn main() {
    std::process::exit(sublinear_gamp::harness::cli::main_entry());
}
