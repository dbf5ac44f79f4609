use std::fs;
use std::path::PathBuf;

use iternet::engine::Strategy;
use iternet::program::Program;

fn corpus() -> Vec<(String, Program)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs/corpus");
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let src = fs::read_to_string(&p).unwrap();
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let prog = Program::from_source(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, prog)
        })
        .collect()
}

#[test]
fn every_program_agrees_with_the_oracle() {
    let mut failures = Vec::new();
    for (name, p) in corpus() {
        match p.check_weak(Strategy::Fifo, 1_000_000) {
            Ok(a) if a.agree => {}
            Ok(a) => failures.push(format!(
                "{name}: net {} oracle {}",
                a.net_result, a.oracle_result
            )),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
        if p.ty.is_first_order() {
            match p.check_deep(Strategy::Fifo, 1_000_000) {
                Ok(a) if a.agree => {}
                Ok(a) => failures.push(format!(
                    "{name} deep: net {} oracle {}",
                    a.net_result, a.oracle_result
                )),
                Err(e) => failures.push(format!("{name} deep: {e}")),
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
