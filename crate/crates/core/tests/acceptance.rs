//! Acceptance suite. Runs the full 324-combination sweep (200 trials of
//! 10^4 bits each) once and checks every criterion against it, printing one
//! PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use berbn::bn::{BayesNet, Cpt, CptRow, Evidence, NetworkStructure, Variable};
use berbn::channel::{dbpsk_theoretical_ber, run_trial, LinkScenario, DISABLED};
use berbn::discretizer::{RangePolicy, SpecSet};
use berbn::experiment::{
    ber_variables, compare_cpt, learn_ber_cpt, run_experiment, run_experiment_with_workers, write_dataset_to,
    ExperimentConfig, ReferenceCpd, Thresholds,
};
use berbn::modem::{demodulate, modulate, Modulation};
use berbn::{vars, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODS: [&str; 3] = ["DBPSK", "DQPSK", "D8PSK"];
const PHIS: [&str; 3] = ["Phi_1", "Phi_2", "Phi_3"];

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn p(cpt: &Cpt, m: &str, e: &str, c: &str, phi: &str, ber_state: usize) -> f64 {
    cpt.row_by_names(&[m, e, c, phi]).unwrap().probs[ber_state]
}

fn states(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

fn ac1(cpt: &Cpt) -> Outcome {
    let mut worst = (f64::INFINITY, String::new());
    for m in MODS {
        for c in states("C/I", 6) {
            for phi in PHIS {
                let v = p(cpt, m, "EbN0_1", &c, phi, 4);
                if v < worst.0 {
                    worst = (v, format!("{m} EbN0_1 {c} {phi}"));
                }
            }
        }
    }
    Outcome {
        id: "AC1",
        title: "EbN0_1 rows have p(BER_5) >= 0.99",
        pass: worst.0 >= 0.99,
        detail: format!("min p(BER_5) = {:.3} at {}", worst.0, worst.1),
    }
}

fn ac2(cpt: &Cpt) -> Outcome {
    let mut worst = (f64::INFINITY, String::new());
    for m in MODS {
        for e in states("EbN0", 6) {
            for phi in PHIS {
                let v = p(cpt, m, &e, "C/I_1", phi, 4);
                if v < worst.0 {
                    worst = (v, format!("{m} {e} C/I_1 {phi}"));
                }
            }
        }
    }
    Outcome {
        id: "AC2",
        title: "C/I_1 rows have p(BER_5) >= 0.99",
        pass: worst.0 >= 0.99,
        detail: format!("min p(BER_5) = {:.3} at {}", worst.0, worst.1),
    }
}

fn ac3(cpt: &Cpt) -> Outcome {
    let mut worst = (f64::INFINITY, String::new());
    for c in ["C/I_3", "C/I_4", "C/I_5", "C/I_6"] {
        for phi in PHIS {
            let v = p(cpt, "DBPSK", "EbN0_6", c, phi, 0);
            if v < worst.0 {
                worst = (v, format!("DBPSK EbN0_6 {c} {phi}"));
            }
        }
    }
    Outcome {
        id: "AC3",
        title: "DBPSK, EbN0_6, C/I >= C/I_3 rows have p(BER_1) >= 0.95",
        pass: worst.0 >= 0.95,
        detail: format!("min p(BER_1) = {:.3} at {}", worst.0, worst.1),
    }
}

fn ac4(cpt: &Cpt) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for phi in PHIS {
        let v: Vec<f64> = MODS.iter().map(|m| p(cpt, m, "EbN0_6", "C/I_2", phi, 0)).collect();
        pass &= v[0] >= v[1] && v[1] >= v[2];
        detail.push(format!("{phi}: {:.3} >= {:.3} >= {:.3}", v[0], v[1], v[2]));
    }
    Outcome {
        id: "AC4",
        title: "p(BER_1) at EbN0_6, C/I_2 ordered DBPSK >= DQPSK >= D8PSK",
        pass,
        detail: detail.join("; "),
    }
}

fn ac5(cpt: &Cpt) -> Outcome {
    let v: Vec<f64> = PHIS
        .iter()
        .map(|phi| p(cpt, "D8PSK", "EbN0_6", "C/I_3", phi, 0))
        .collect();
    let gap = v[0] - v[2];
    Outcome {
        id: "AC5",
        title: "D8PSK, EbN0_6, C/I_3: p(BER_1|Phi_1) - p(BER_1|Phi_3) >= 0.2",
        pass: gap >= 0.2,
        detail: format!(
            "p(BER_1) Phi_1/2/3 = {:.3}/{:.3}/{:.3}, gap {gap:.3}; interferer + accumulating Doppler ramp",
            v[0], v[1], v[2]
        ),
    }
}

fn ac6() -> Outcome {
    let n = 1_000_000u64;
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, ebn0) in [0.0, 6.0, 10.0].into_iter().enumerate() {
        let sc = LinkScenario {
            modulation: Modulation::Dbpsk,
            ebn0_db: ebn0,
            ci_db: DISABLED,
            dop_phi_rad: 0.0,
            n_bits: n,
            seed: 1000 + i as u64,
        };
        let r = run_trial(&sc).unwrap();
        let theory = dbpsk_theoretical_ber(ebn0);
        let se = (theory * (1.0 - theory) / n as f64).sqrt();
        let z = (r.ber - theory) / se;
        pass &= z.abs() <= 3.0;
        detail.push(format!("{ebn0} dB: {:.4e} vs {theory:.4e} (z {z:+.2})", r.ber));
    }
    Outcome {
        id: "AC6",
        title: "DBPSK AWGN BER within 3 standard errors of exp(-Eb/N0)/2",
        pass,
        detail: detail.join("; "),
    }
}

/// Random row: Dirichlet-like weights with some entries forced to zero.
fn random_distribution(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..k)
            .map(|_| {
                if rng.random_bool(0.25) {
                    0.0
                } else {
                    -rng.random::<f64>().max(1e-300).ln()
                }
            })
            .collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return w.into_iter().map(|x| x / s).collect();
        }
    }
}

/// Brute force: materialize every joint entry from names alone, then sum.
fn oracle_posterior(
    variables: &[Variable],
    priors: &HashMap<String, Vec<f64>>,
    cpt_rows: &HashMap<Vec<String>, Vec<f64>>,
    parents: &[String],
    evidence: &BTreeMap<String, String>,
) -> Option<BTreeMap<String, Vec<f64>>> {
    let radix: Vec<usize> = variables.iter().map(Variable::cardinality).collect();
    let total_entries: usize = radix.iter().product();
    let mut joint = Vec::with_capacity(total_entries);
    for flat in 0..total_entries {
        let mut rem = flat;
        let mut assign = BTreeMap::new();
        for (v, &r) in variables.iter().zip(&radix) {
            assign.insert(v.name.clone(), v.states[rem % r].clone());
            rem /= r;
        }
        let mut w = 1.0;
        for v in variables {
            let s = v.state_index(&assign[&v.name]).unwrap();
            w *= match priors.get(&v.name) {
                Some(prior) => prior[s],
                None => {
                    let key: Vec<String> = parents.iter().map(|pn| assign[pn].clone()).collect();
                    cpt_rows[&key][s]
                }
            };
        }
        joint.push((assign, w));
    }
    let consistent = |a: &BTreeMap<String, String>| evidence.iter().all(|(k, v)| &a[k] == v);
    let z: f64 = joint.iter().filter(|(a, _)| consistent(a)).map(|(_, w)| w).sum();
    if z == 0.0 {
        return None;
    }
    let mut out = BTreeMap::new();
    for v in variables {
        let probs = v
            .states
            .iter()
            .map(|s| {
                joint
                    .iter()
                    .filter(|(a, _)| consistent(a) && &a[&v.name] == s)
                    .map(|(_, w)| w)
                    .sum::<f64>()
                    / z
            })
            .collect();
        out.insert(v.name.clone(), probs);
    }
    Some(out)
}

fn ac7() -> Outcome {
    let specs = SpecSet::table1();
    let variables = ber_variables(&specs);
    let structure = NetworkStructure::ber_default();
    let parent_names: Vec<String> = structure.parents(vars::BER).into_iter().map(String::from).collect();
    let find = |n: &str| variables.iter().find(|v| v.name == n).unwrap().clone();
    let parents: Vec<Variable> = parent_names.iter().map(|n| find(n)).collect();
    let ber = find(vars::BER);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut max_err = 0.0f64;
    let mut impossible = 0;
    let mut failures = Vec::new();
    for case in 0..100 {
        let rows: Vec<CptRow> = (0..324)
            .map(|_| CptRow {
                probs: random_distribution(&mut rng, 5),
                n: 0,
                observed: true,
            })
            .collect();
        let cpt = Cpt::new(ber.clone(), parents.clone(), rows).unwrap();
        let mut net = BayesNet::new(variables.clone(), structure.clone(), vec![cpt.clone()]).unwrap();
        let mut priors = HashMap::new();
        for root in &parent_names {
            let k = find(root).cardinality();
            let d = random_distribution(&mut rng, k);
            net.set_prior(root, d.clone()).unwrap();
            priors.insert(root.clone(), d);
        }
        let cpt_rows: HashMap<Vec<String>, Vec<f64>> = cpt
            .to_document()
            .rows
            .into_iter()
            .map(|r| (r.parent_states, r.probs))
            .collect();

        let mut evidence = Evidence::new();
        let mut ev_map = BTreeMap::new();
        for v in &variables {
            if rng.random_bool(if v.name == vars::BER { 0.8 } else { 0.3 }) {
                let s = &v.states[rng.random_range(0..v.cardinality())];
                evidence.insert(&v.name, s);
                ev_map.insert(v.name.clone(), s.clone());
            }
        }

        match (
            oracle_posterior(&variables, &priors, &cpt_rows, &parent_names, &ev_map),
            net.infer_posterior(&evidence),
        ) {
            (None, Err(Error::ImpossibleEvidence)) => impossible += 1,
            (Some(expected), Ok(post)) => {
                for (name, probs) in expected {
                    let got = &post.get(&name).unwrap().probs;
                    for (a, b) in got.iter().zip(&probs) {
                        max_err = max_err.max((a - b).abs());
                    }
                }
            }
            (e, g) => failures.push(format!(
                "case {case}: oracle {:?} vs engine {:?}",
                e.is_some(),
                g.is_ok()
            )),
        }
    }
    Outcome {
        id: "AC7",
        title: "exact inference matches brute-force joint normalization within 1e-12 (100 random CPTs)",
        pass: failures.is_empty() && max_err <= 1e-12,
        detail: if failures.is_empty() {
            format!("max abs error {max_err:.2e}; {impossible} impossible-evidence cases agreed")
        } else {
            format!("max abs error {max_err:.2e}; mismatches: {}", failures.join("; "))
        },
    }
}

fn ac8(full: &Cpt, trials: u32) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // Modem round trip on random bit strings up to 10^4 bits.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut rt_ok = true;
    for m in Modulation::ALL {
        for _ in 0..40 {
            let k = m.bits_per_symbol();
            let len = rng.random_range(1..=10_000 / k) * k;
            let bits: Vec<u8> = (0..len).map(|_| rng.random_range(0..=1u8)).collect();
            rt_ok &= demodulate(&modulate(&bits, m).unwrap(), m).unwrap() == bits;
        }
    }
    pass &= rt_ok;
    notes.push(format!("round-trip {}", if rt_ok { "ok" } else { "FAILED" }));

    // CPT row normalization.
    let worst = full
        .rows()
        .iter()
        .map(|r| (r.probs.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    pass &= worst <= 1e-9;
    notes.push(format!("max |row sum - 1| {worst:.1e}"));

    // Discretizer boundaries from the state table.
    let specs = SpecSet::table1();
    let cases: [(&str, f64, &str); 10] = [
        (vars::EBN0, -72.8, "EbN0_1"),
        (vars::EBN0, 0.0, "EbN0_2"),
        (vars::EBN0, 10.0, "EbN0_3"),
        (vars::EBN0, 109.1, "EbN0_6"),
        (vars::CI, 20.0, "C/I_3"),
        (vars::CI, 159.0, "C/I_6"),
        (vars::DOP_PHI, 0.05, "Phi_2"),
        (vars::DOP_PHI, 0.136, "Phi_3"),
        (vars::BER, 0.0, "BER_1"),
        (vars::BER, 1e-3, "BER_3"),
    ];
    let mut disc_ok = cases
        .iter()
        .all(|(v, x, s)| specs.get(v).unwrap().discretize(*x).unwrap() == *s);
    disc_ok &= specs.get(vars::DOP_PHI).unwrap().discretize(0.2).is_err();
    disc_ok &= specs
        .get(vars::EBN0)
        .unwrap()
        .discretize_index(-80.0, RangePolicy::Clamp)
        .unwrap()
        == 0;
    pass &= disc_ok;
    notes.push(format!("boundaries {}", if disc_ok { "ok" } else { "FAILED" }));

    // Determinism under different worker counts.
    let small = ExperimentConfig {
        trials_per_combo: 2,
        bits_per_trial: 1_000,
        master_seed: 42,
        ..Default::default()
    };
    let bytes = |workers: usize| {
        let data = run_experiment_with_workers(&small, workers).unwrap();
        let mut buf = Vec::new();
        write_dataset_to(&data, &mut buf).unwrap();
        buf
    };
    let one = bytes(1);
    let det_ok = one == bytes(3) && one == bytes(8) && one == bytes(1);
    pass &= det_ok;
    notes.push(format!("dataset determinism {}", if det_ok { "ok" } else { "FAILED" }));

    // Probabilities are multiples of 1/T.
    let t = trials as f64;
    let gran_ok = full
        .rows()
        .iter()
        .all(|r| r.probs.iter().all(|p| ((p * t) - (p * t).round()).abs() < 1e-9));
    pass &= gran_ok;
    notes.push(format!(
        "1/{trials} granularity {}",
        if gran_ok { "ok" } else { "FAILED" }
    ));

    Outcome {
        id: "AC8",
        title: "property suites",
        pass,
        detail: notes.join("; "),
    }
}

fn main() {
    let config = ExperimentConfig::default();
    assert_eq!((config.trials_per_combo, config.bits_per_trial), (200, 10_000));

    let start = Instant::now();
    let data = run_experiment(&config).expect("full sweep");
    let cpt = learn_ber_cpt(&data, &config.specs, 0.0).expect("learning");
    println!(
        "full sweep: {} trials, {} bits, {} unobserved rows, {:.1}s",
        data.len(),
        data.iter().map(|r| r.n_bits).sum::<u64>(),
        cpt.unobserved_count(),
        start.elapsed().as_secs_f64()
    );
    assert_eq!(data.len(), 64_800);
    assert_eq!(cpt.unobserved_count(), 0);

    let outcomes = vec![
        ac1(&cpt),
        ac2(&cpt),
        ac3(&cpt),
        ac4(&cpt),
        ac5(&cpt),
        ac6(),
        ac7(),
        ac8(&cpt, config.trials_per_combo),
    ];

    let cmp = compare_cpt(&cpt, &ReferenceCpd::paper(), Thresholds::default()).unwrap();
    println!(
        "reference tables: {} rows, max TV {:.3}, mean TV {:.3}, {} rows over threshold",
        cmp.rows.len(),
        cmp.max_distance,
        cmp.mean_distance,
        cmp.failures().count()
    );

    let mut failed = 0;
    for o in &outcomes {
        println!(
            "[{}] {} {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
