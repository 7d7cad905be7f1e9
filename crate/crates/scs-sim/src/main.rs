fn main() {
    eprintln!("scs-sim: CLI not wired up yet");
    std::process::exit(2);
}
