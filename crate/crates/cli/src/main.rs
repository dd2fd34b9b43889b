fn main() {
    let stdout = std::io::stdout();
    let code = sigvol_cli::execute(std::env::args_os(), &mut stdout.lock());
    std::process::exit(code);
}
