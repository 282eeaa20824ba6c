use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfscope_core::doe::DoeEntry;
use tfscope_core::truckfactor::{compute_truck_factor, STOP_COVERAGE};
use tfscope_core::{DeveloperId, FileKnowledge};
use tfscope_testkit::oracle::{simulate_truck_factor, SimEntry};

const DEVS: [&str; 6] = ["ana", "ben", "cho", "dev", "eli", "fay"];

/// Random instance with coarse DOE values so ties on file count and DOE sum
/// actually happen.
fn instance(rng: &mut ChaCha8Rng) -> Vec<Vec<SimEntry>> {
    let n_files = rng.gen_range(1..=12);
    let n_devs = rng.gen_range(1..=6);
    (0..n_files)
        .map(|_| {
            let mut entries = Vec::new();
            for d in &DEVS[..n_devs] {
                if rng.gen_bool(0.5) {
                    entries.push(SimEntry {
                        developer: d.to_string(),
                        doe: f64::from(rng.gen_range(-2i32..=8)) * 0.5,
                        expert: rng.gen_bool(0.6),
                    });
                }
            }
            entries
        })
        .collect()
}

fn to_knowledge(files: &[Vec<SimEntry>]) -> Vec<FileKnowledge> {
    files
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = format!("f{i}");
            let entries: Vec<DoeEntry> = f
                .iter()
                .map(|e| DoeEntry {
                    developer_id: e.developer.as_str().into(),
                    path: path.clone(),
                    adds: 0,
                    first_authorship: false,
                    num_days: 0,
                    doe: e.doe,
                    normalized_doe: 0.0,
                })
                .collect();
            FileKnowledge {
                experts: f
                    .iter()
                    .filter(|e| e.expert)
                    .map(|e| e.developer.as_str().into())
                    .collect(),
                importance_score: entries.iter().map(|e| e.doe).sum(),
                loc: 1,
                path,
                entries,
            }
        })
        .collect()
}

#[test]
fn matches_step_simulator_on_random_instances() {
    for seed in 0..2000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sim = instance(&mut rng);
        let knowledge = to_knowledge(&sim);
        let refs: Vec<&FileKnowledge> = knowledge.iter().collect();
        let got = compute_truck_factor(&refs);
        let want = simulate_truck_factor(&sim);
        let got_ids: Vec<&str> = got.removed_developers.iter().map(DeveloperId::as_str).collect();
        assert_eq!(got_ids, want, "seed {seed}");
        assert_eq!(got.value, want.len(), "seed {seed}");
    }
}

#[test]
fn trace_shape() {
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let knowledge = to_knowledge(&instance(&mut rng));
        let refs: Vec<&FileKnowledge> = knowledge.iter().collect();
        let r = compute_truck_factor(&refs);
        assert_eq!(r.coverage_trace.len(), r.value + 1);
        let (last, rest) = r.coverage_trace.split_last().unwrap();
        assert!(last.coverage <= STOP_COVERAGE);
        assert!(rest.iter().all(|s| s.coverage > STOP_COVERAGE));
        for w in r.coverage_trace.windows(2) {
            assert!(w[1].coverage <= w[0].coverage);
        }
    }
}
