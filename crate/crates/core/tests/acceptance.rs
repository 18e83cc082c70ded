use tmod_core::suite::{run, SuiteConfig};

#[test]
fn acceptance_criteria() {
    let start = std::time::Instant::now();
    let results = run(&SuiteConfig::default());
    for c in &results {
        println!("{}", c.line());
    }
    println!("suite finished in {:.1}s", start.elapsed().as_secs_f64());
    for c in &results {
        for case in c.cases.iter().filter(|x| !x.pass) {
            println!("  criterion {} failing case {}: {:?} {:?}", c.id, case.name, case.residual, case.note);
        }
    }
    assert_eq!(results.len(), 9);
    assert!(results.iter().all(|c| c.pass), "some acceptance criteria failed");
}
