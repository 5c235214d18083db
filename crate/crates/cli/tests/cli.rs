use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metricreact"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, text: &str) -> String {
    let p = std::env::temp_dir().join(format!("metricreact-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap();
    line[key.len()..]
        .trim_start_matches(':')
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn validate_accepts_fixture() {
    let o = run(&["validate", &fixture("single_site.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("valid: 3 vertices, 2 edges, 1 active, 1 exits"));
}

#[test]
fn validate_reports_exit_degree() {
    let doc = r#"{
        "vertices": [{"id": "c", "role": "active"}, {"id": "a", "role": "exit"}, {"id": "b", "role": "inert"}],
        "edges": [{"from": "c", "to": "a", "length": 1}, {"from": "a", "to": "b", "length": 1}]
    }"#;
    let o = run(&["validate", &scratch("exit-degree.json", doc)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("exit") && err.contains("'a'"), "{err}");
}

#[test]
fn malformed_document_reports_location() {
    let o = run(&[
        "validate",
        &scratch("broken.json", "{\n  \"vertices\": [,]\n}"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn unreadable_file_is_input_error() {
    let o = run(&["validate", "/nonexistent/graph.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_are_input_errors() {
    assert_eq!(
        run(&["convert", &fixture("single_site.json")])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn convert_single_site() {
    let o = run(&["convert", &fixture("single_site.json"), "--kappa", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("alpha (kac): 0.666666666667"));
    assert!(text.contains("alpha (fk): 0.666666666667"));
    assert!(value(&text, "difference") <= 1e-12);
    assert!(text.contains("c,1,0.333333333333"));
}

#[test]
fn convert_zero_and_infinite_rates() {
    let o = run(&["convert", &fixture("y_graph.json"), "--kappa", "0"]);
    assert_eq!(value(&stdout(&o), "alpha (kac)"), 0.0);
    let o = run(&["convert", &fixture("y_graph.json"), "--kappa", "inf"]);
    let text = stdout(&o);
    assert_eq!(value(&text, "alpha (kac)"), 0.5);
    assert_eq!(value(&text, "alpha_inf"), 0.5);
}

#[test]
fn convert_per_site_rates() {
    let o = run(&[
        "convert",
        &fixture("chain_m2.json"),
        "--site-kappa",
        "0.5,2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(value(&stdout(&o), "difference") <= 1e-9);
    let o = run(&["convert", &fixture("chain_m2.json"), "--site-kappa", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn negative_rate_is_input_error() {
    let o = run(&["convert", &fixture("single_site.json"), "--kappa=-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_rows_are_monotone() {
    let o = run(&[
        "sweep",
        &fixture("single_site.json"),
        "--kappa-min",
        "0.1",
        "--kappa-max",
        "10",
        "--steps",
        "3",
    ]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kappa,alpha,psi,method");
    assert_eq!(lines.len(), 4);
    let alphas: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(alphas.windows(2).all(|p| p[0] <= p[1]));
    assert!(lines[1].starts_with("0.1,") && lines[3].starts_with("10,"));
}

#[test]
fn sweep_two_steps_gives_endpoints_for_each_method() {
    let o = run(&[
        "sweep",
        &fixture("star_n3.json"),
        "--kappa-min",
        "0",
        "--kappa-max",
        "2",
        "--steps",
        "2",
        "--spacing",
        "linear",
        "--method",
        "both",
    ]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(
        rows,
        [
            "0,0,1,kac",
            "2,0.857142857143,0.142857142857,kac",
            "0,0,1,fk",
            "2,0.857142857143,0.142857142857,fk"
        ]
    );
}

#[test]
fn sweep_rejects_bad_ranges() {
    let f = fixture("single_site.json");
    assert_eq!(
        run(&[
            "sweep",
            &f,
            "--kappa-min",
            "2",
            "--kappa-max",
            "1",
            "--steps",
            "3"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&[
            "sweep",
            &f,
            "--kappa-min",
            "0",
            "--kappa-max",
            "1",
            "--steps",
            "3"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&[
            "sweep",
            &f,
            "--kappa-min",
            "0.1",
            "--kappa-max",
            "1",
            "--steps",
            "1"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn sweep_writes_file() {
    let out =
        std::env::temp_dir().join(format!("metricreact-cli-{}-sweep.csv", std::process::id()));
    let o = run(&[
        "sweep",
        &fixture("single_site.json"),
        "--kappa-min",
        "1",
        "--kappa-max",
        "4",
        "--steps",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(2).unwrap(), "2,0.8,0.2,kac");
}

#[test]
fn rational_coefficients() {
    let text = stdout(&run(&["rational", &fixture("single_site.json")]));
    assert_eq!(text, "numerator: 0 2\ndenominator: 1 2\n");
    let text = stdout(&run(&["rational", &fixture("star_n4.json")]));
    assert_eq!(text, "numerator: 0 4\ndenominator: 1 4\n");
    let text = stdout(&run(&["rational", &fixture("chain_m2.json")]));
    assert_eq!(text.lines().nth(1).unwrap().split(' ').count(), 4);
}

#[test]
fn green_on_chain() {
    let text = stdout(&run(&["green", &fixture("chain_m3.json")]));
    // lengths 0.5, 1, 0.25, 2: distances to the exit are 3.25, 2.25, 2
    assert_eq!(
        text,
        "site,c1,c2,c3\nc1,6.5,4.5,4\nc2,4.5,4.5,4\nc3,4,4,4\n"
    );
}

#[test]
fn hit_on_chain_is_first_site() {
    let text = stdout(&run(&["hit", &fixture("chain_m3.json")]));
    assert_eq!(value(&text, "alpha_inf"), 1.0);
    assert_eq!(value(&text, "p(c1)"), 1.0);
    assert_eq!(value(&text, "p(c2)"), 0.0);
}

#[test]
fn mc_is_byte_stable_across_thread_counts() {
    let args = [
        "mc",
        &fixture("single_site.json"),
        "--kappa",
        "1,inf",
        "--n",
        "4000",
        "--seed",
        "9",
    ];
    let run_with = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_metricreact"))
            .args(args)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = run_with("1");
    let b = run_with("3");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().next().unwrap(), "kappa,mean,se,n,delta,seed");
    assert_eq!(text.lines().nth(2).unwrap(), "inf,0,0,4000,0.05,9");
}

#[test]
fn diffuse_table() {
    let text = stdout(&run(&[
        "diffuse",
        &fixture("interval.json"),
        "--k",
        "1",
        "--delta",
        "1",
        "--diffusion",
        "1",
        "--h-list",
        "0.1,0.01,0.001",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,psi_h,psi_limit,abs_err");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].ends_with("e-05"));
    let bad = run(&[
        "diffuse",
        &fixture("interval.json"),
        "--k",
        "1",
        "--delta",
        "1",
        "--diffusion",
        "1",
        "--h-list",
        "0.01,0.1",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn compare_on_star_passes() {
    let o = run(&[
        "compare",
        &fixture("star_n3.json"),
        "--kappa",
        "2",
        "--n",
        "20000",
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("kac,0.142857142857,"));
    assert!(text.lines().last().unwrap().starts_with("pass"));
}
