fn main() {
    std::process::exit(radar_vitals::cli::run(std::env::args_os()));
}
