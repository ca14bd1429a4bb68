//! Drives the `dss` front end in-process.

use dss_bva::cli::run;

fn main() {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/nominal.json");
    for args in [
        vec!["eval"],
        vec!["classify", "--dss", "-0.01"],
        vec!["derive", "--format", "csv"],
        vec!["verify", "--samples", "200"],
    ] {
        println!("$ dss --config nominal.json {}", args.join(" "));
        let argv = ["dss", "--config", config].into_iter().chain(args);
        let code = run(argv, &mut std::io::stdout(), &mut std::io::stderr());
        println!("exit {code}\n");
    }
}
