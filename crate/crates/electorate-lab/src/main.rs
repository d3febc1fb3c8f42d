fn main() {
    std::process::exit(electorate_lab::cli::run());
}
