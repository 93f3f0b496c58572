fn main() -> std::process::ExitCode {
    ellipsoid_distance::cli::main()
}
