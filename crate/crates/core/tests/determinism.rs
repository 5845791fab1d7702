use std::fs;
use std::process::Command;

fn run(args: &[&str], threads: &str) {
    let o = Command::new(env!("CARGO_BIN_EXE_o2bench"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn without_wall_ms(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').unwrap().0)
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn scalar_csv_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "4", "4"].into_iter().enumerate() {
        let out = dir.path().join(k.to_string());
        run(
            &[
                "bench",
                "--experiment",
                "ungm",
                "--runs",
                "6",
                "--steps",
                "30",
                "--particles",
                "50",
                "--seed",
                "5",
                "--out",
                out.to_str().unwrap(),
            ],
            threads,
        );
        outputs.push(fs::read(out.join("rmse.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn sweep_and_pofb_csv_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut sweeps = Vec::new();
    let mut pofbs = Vec::new();
    for (k, threads) in ["1", "3"].into_iter().enumerate() {
        let out = dir.path().join(format!("s{k}"));
        run(
            &[
                "bench",
                "--experiment",
                "model-b-sweep",
                "--runs",
                "3",
                "--steps",
                "40",
                "--grid",
                "0.01,1",
                "--out",
                out.to_str().unwrap(),
            ],
            threads,
        );
        sweeps.push(fs::read(out.join("sweep.csv")).unwrap());
        let p = dir.path().join(format!("p{k}.csv"));
        run(
            &[
                "pofb",
                "--rule",
                "particle",
                "--samples",
                "2000",
                "--seed",
                "9",
                "--out",
                p.to_str().unwrap(),
            ],
            threads,
        );
        pofbs.push(fs::read(p).unwrap());
    }
    assert_eq!(sweeps[0], sweeps[1]);
    assert_eq!(pofbs[0], pofbs[1]);
}

#[test]
fn mtt_rows_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = Vec::new();
    for (k, threads) in ["1", "4"].into_iter().enumerate() {
        let out = dir.path().join(k.to_string());
        run(
            &[
                "mtt",
                "--runs",
                "3",
                "--steps",
                "15",
                "--particles",
                "100",
                "--sensors",
                "3",
                "--tracker",
                "oft,t2t,o2-cluster",
                "--out",
                out.to_str().unwrap(),
            ],
            threads,
        );
        let mut all = String::new();
        for name in ["oft-meap", "t2t-meap", "o2-cluster"] {
            all += &without_wall_ms(&fs::read_to_string(out.join(format!("mtt-{name}.csv"))).unwrap());
        }
        rows.push(all);
    }
    assert_eq!(rows[0], rows[1]);
}
