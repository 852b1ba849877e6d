fn main() {
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let code = ccit::cli::run(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
