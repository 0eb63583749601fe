//! The command-line workflow driven in-process: analyze, simulate, audit
//! and co-simulate into a scratch directory.
//!
//! ```bash
//! cargo run --example cli_pipeline
//! ```

use phcirc::cli::main_with_args;

fn main() {
    let out = tempfile::tempdir().unwrap();
    let dir = |name: &str| out.path().join(name).to_string_lossy().into_owned();
    let netlist = |name: &str| format!("{}/netlists/{name}", env!("CARGO_MANIFEST_DIR"));

    let runs: Vec<Vec<String>> = vec![
        vec!["analyze".into(), netlist("two_block_rc.cir"), "--out".into(), dir("analyze")],
        vec!["simulate".into(), netlist("driven_rlc.cir"), "--t-end".into(), "2".into(), "--h".into(), "0.01".into(), "--out".into(), dir("sim")],
        vec!["audit".into(), netlist("driven_rlc.cir"), format!("{}/waveform.csv", dir("sim")), "--out".into(), dir("audit")],
        vec![
            "cosim".into(), netlist("two_block_rc.cir"), "--t-end".into(), "0.5".into(), "--h".into(), "0.01".into(),
            "--window".into(), "0.1".into(), "--scheme".into(), "gs".into(), "--reference".into(), "--out".into(), dir("cosim"),
        ],
    ];
    for args in runs {
        println!("$ phcirc {}", args.join(" "));
        let code = main_with_args(std::iter::once("phcirc".to_string()).chain(args));
        println!("exit code {code}\n");
    }
    let manifest = std::fs::read_to_string(out.path().join("cosim/manifest.json")).unwrap();
    println!("cosim manifest:\n{manifest}");
}
