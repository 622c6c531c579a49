//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};

use compcap::model_file::parse_model;
use compcap::problem_file::parse_problem;
use compcap_core::counting::count_sequences;
use compcap_core::distribution::{efficiency, optimal_distribution, InstructionDistribution};
use compcap_core::memory::{AccessClass, MemoryDesignProblem, MemoryKind};
use compcap_core::model::{
    BoundInstructionSet, InstructionClass, InstructionSet, Member, ParameterBinding, TimeExpression,
};
use compcap_core::rational::parse_rational;
use compcap_core::solver::{eval_characteristic, log2_characteristic, solve_capacity, DEFAULT_TOLERANCE};
use compcap_core::trace::TraceStatistics;
use compcap_core::Rational;
use num_bigint::{BigInt, BigUint};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn asset_set(name: &str, binding: &ParameterBinding) -> BoundInstructionSet {
    let text = std::fs::read_to_string(common::assets().join(name)).unwrap();
    parse_model(&text).unwrap().bind(binding).unwrap()
}

fn capacity(set: &BoundInstructionSet) -> f64 {
    solve_capacity(set, DEFAULT_TOLERANCE).unwrap().capacity_bits
}

fn random_classes(rng: &mut StdRng) -> Vec<(u64, u64)> {
    let n = rng.random_range(1..=6);
    (0..n).map(|_| (rng.random_range(1..=1_000_000), rng.random_range(1..=64))).collect()
}

fn mix() -> Outcome {
    let cap = capacity(&asset_set("mix.json", &ParameterBinding::new()));
    check((28.16..=28.18).contains(&cap), || format!("capacity {cap} outside [28.16, 28.18]"))?;
    check((cap - 28.0).abs() <= 0.2, || format!("capacity {cap} not within 0.2 of 28"))?;
    Ok(format!("capacity {cap:.10} in [28.16, 28.18]; {:+.4} from the reference figure 28", cap - 28.0))
}

fn mmix() -> Outcome {
    let mut parts = Vec::new();
    for mu in ["1.0", "1.2", "2.0", "5.0"] {
        let b = ParameterBinding::new().with("mu", parse_rational(mu).unwrap());
        let cap = capacity(&asset_set("mmix.json", &b));
        check((31.118..=31.120).contains(&cap), || format!("mu={mu}: capacity {cap} outside [31.118, 31.120]"))?;
        check((31.0..=31.6).contains(&cap), || format!("mu={mu}: capacity {cap} outside the gate [31.0, 31.6]"))?;
        parts.push(format!("mu={mu}: {cap:.6} ({:+.4} vs reference figure 31.5)", cap - 31.5));
    }
    Ok(parts.join(", "))
}

fn closed_forms() -> Outcome {
    let two = capacity(&BoundInstructionSet::from_classes(&[(2, 1)]).unwrap());
    check((two - 1.0).abs() <= 1e-12, || format!("{{2x1}} gave {two}"))?;
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let s = rng.random_range(1..=1_000_000u64);
        let t = rng.random_range(1..=64u64);
        let cap = capacity(&BoundInstructionSet::from_classes(&[(s, t)]).unwrap());
        let err = (cap - (s as f64).log2() / t as f64).abs();
        worst = worst.max(err);
        check(err <= 1e-12, || format!("{{{s}x{t}}} off by {err:e}"))?;
    }
    let toy = capacity(&BoundInstructionSet::from_classes(&[(2, 1), (1, 2)]).unwrap());
    let want = (1.0 + 2f64.sqrt()).log2();
    check((toy - want).abs() <= 1e-9, || format!("toy gave {toy}, want {want}"))?;
    Ok(format!("50 random single classes, worst error {worst:.1e}; toy {toy:.10}"))
}

fn oracle() -> Outcome {
    let set = BoundInstructionSet::from_classes(&[(2, 1), (1, 2)]).unwrap();
    let table = count_sequences(&set, 64).unwrap();
    let first: Vec<String> = table.counts()[..5].iter().map(|n| n.to_string()).collect();
    check(first == ["1", "2", "5", "12", "29"], || format!("N(0..4) = {first:?}"))?;
    let gap = table.capacity_estimate(64).unwrap() - (1.0 + 2f64.sqrt()).log2();
    check(gap.abs() <= 0.01, || format!("gap at T=64 is {gap}"))?;
    let n = table.counts();
    for t1 in 0..=64 {
        for t2 in 0..=(64 - t1) {
            check(n[t1 + t2] >= &n[t1] * &n[t2], || format!("N({t1}+{t2}) < N({t1})N({t2})"))?;
        }
    }
    Ok(format!("N(0..4) = 1 2 5 12 29; gap at T=64 {gap:.5}; superadditive for T1+T2 <= 64"))
}

fn optimal_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst_identity: f64 = 0.0;
    let mut worst_margin = f64::NEG_INFINITY;
    for _ in 0..20 {
        let c = random_classes(&mut rng);
        let set = BoundInstructionSet::from_classes(&c).unwrap();
        let cap = solve_capacity(&set, DEFAULT_TOLERANCE).unwrap();
        let y = cap.capacity_bits;
        let d = optimal_distribution(&set, &cap);
        let h: f64 = c
            .iter()
            .map(|&(n, t)| {
                let p = (-(t as f64) * y).exp2();
                if p > 0.0 { -(n as f64) * p * p.log2() } else { 0.0 }
            })
            .sum();
        let e = efficiency(&set, &d, h).unwrap();
        worst_identity = worst_identity.max((e - y).abs());
        check((e - y).abs() <= 1e-9, || format!("{c:?}: efficiency(p*) {e} vs capacity {y}"))?;

        let names: Vec<String> = (0..c.len()).map(|i| format!("c{i}")).collect();
        for _ in 0..100 {
            let w: Vec<f64> = (0..c.len()).map(|_| rng.random::<f64>() + 1e-12).collect();
            let total: f64 = w.iter().sum();
            let masses: Vec<(&str, f64)> = names.iter().map(String::as_str).zip(w.iter().map(|x| x / total)).collect();
            let d = InstructionDistribution::uniform_within_members(&set, &masses).unwrap();
            let e = efficiency(&set, &d, d.instruction_entropy()).unwrap();
            worst_margin = worst_margin.max(e - y);
            check(e <= y + 1e-9, || format!("{c:?}: a random distribution reached {e} > {y}"))?;
        }
    }
    Ok(format!(
        "20 sets: |eff(p*) - C| <= {worst_identity:.1e}; 2000 random distributions, max eff - C = {worst_margin:.3e}"
    ))
}

fn memory_example() -> Outcome {
    let path = common::assets().join("paper-memory-example.json");
    let file = parse_problem(&std::fs::read_to_string(&path).unwrap(), &common::assets()).unwrap();
    let problem = file.build(&ParameterBinding::new()).unwrap();
    let out = problem.optimize_vertex(DEFAULT_TOLERANCE).unwrap();
    let pure = |i: usize| {
        out.candidates
            .iter()
            .find(|a| a.cells.iter().enumerate().all(|(j, (_, n))| (j == i) != (*n == BigUint::from(0u32))))
            .map(|a| a.capacity_bits())
            .unwrap()
    };
    let (c1, c2) = (pure(0), pure(1));
    let chosen = out.best.cells.iter().position(|(_, n)| *n != BigUint::from(0u32));
    check(chosen == Some(0) && !out.tie, || format!("selected {:?} (tie {})", out.best.cells, out.tie))?;
    check(c1 > c2, || format!("kind 1 {c1} not above kind 2 {c2}"))?;
    for c in [c1, c2] {
        check((31.11..=31.13).contains(&c), || format!("capacity {c} outside [31.11, 31.13]"))?;
    }
    Ok(format!("kind 1 selected: {c1:.10} vs kind 2 {c2:.10} (difference {:.2e})", c1 - c2))
}

fn random_problem(rng: &mut StdRng) -> MemoryDesignProblem {
    let base_classes = rng.random_range(1..=3);
    let base = InstructionSet::new(
        "b",
        vec![],
        (0..base_classes)
            .map(|i| {
                Member::Class(InstructionClass {
                    name: format!("b{i}"),
                    count: BigUint::from(rng.random_range(1..=4u32)),
                    time: TimeExpression::constant(int(rng.random_range(1..=4))),
                })
            })
            .collect(),
    )
    .unwrap();
    let kinds = (0..rng.random_range(1..=3))
        .map(|k| {
            let classes = (0..rng.random_range(1..=3))
                .map(|_| {
                    AccessClass::new(rng.random_range(1..=4u32), TimeExpression::constant(int(rng.random_range(1..=6))))
                })
                .collect();
            MemoryKind::new(format!("k{k}"), int(rng.random_range(1..=5)), classes)
        })
        .collect();
    MemoryDesignProblem::new(
        base,
        BigUint::from(rng.random_range(1..=3u32)),
        kinds,
        int(rng.random_range(0..=10)),
        ParameterBinding::new(),
    )
    .unwrap()
}

fn optimizer_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..20 {
        let p = random_problem(&mut rng);
        let grid = p.optimize_grid(1, DEFAULT_TOLERANCE).unwrap().best.capacity_bits();
        let vertex = p.optimize_vertex(DEFAULT_TOLERANCE).unwrap().best.capacity_bits();
        worst = worst.max(grid - vertex);
        check(grid <= vertex + 1e-10, || format!("problem {i}: grid {grid} > vertex {vertex}"))?;
    }
    Ok(format!("20 random problems, max grid - vertex = {worst:.2e}"))
}

fn properties() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let c = random_classes(&mut rng);
        let set = BoundInstructionSet::from_classes(&c).unwrap();
        let a = rng.random_range(0.0..40.0);
        let b = a + rng.random_range(0.01..5.0);
        check(log2_characteristic(&set, a) > log2_characteristic(&set, b), || format!("{c:?}: g not decreasing"))?;
        check(eval_characteristic(&set, a) >= eval_characteristic(&set, b), || format!("{c:?}: g increased"))?;

        let cap = solve_capacity(&set, DEFAULT_TOLERANCE).unwrap();
        let y = cap.capacity_bits;
        let kraft: f64 = c.iter().map(|&(n, t)| n as f64 * (-(t as f64) * y).exp2()).sum();
        check((kraft - 1.0).abs() <= 1e-10, || format!("{c:?}: Kraft sum {kraft}"))?;

        let mut more = c.clone();
        more.push((rng.random_range(1..=1000), rng.random_range(1..=64)));
        let added = capacity(&BoundInstructionSet::from_classes(&more).unwrap());
        check(added >= y - 1e-12, || format!("{c:?}: adding a class lowered capacity"))?;

        let mut slower = c.clone();
        let i = rng.random_range(0..slower.len());
        slower[i].1 += rng.random_range(1..10);
        let slowed = capacity(&BoundInstructionSet::from_classes(&slower).unwrap());
        check(slowed <= y + 1e-12, || format!("{c:?}: a slower instruction raised capacity"))?;

        for lambda in [2u64, 3, 10] {
            let scaled: Vec<(u64, u64)> = c.iter().map(|&(n, t)| (n, t * lambda)).collect();
            let got = capacity(&BoundInstructionSet::from_classes(&scaled).unwrap());
            let want = y / lambda as f64;
            check((got - want).abs() <= 1e-10 * want || (got == 0.0 && want == 0.0), || {
                format!("{c:?}: scaling by {lambda} gave {got}, want {want}")
            })?;
        }
    }
    for t in 0..20 {
        let alphabet = rng.random_range(2..=5u8);
        let len = rng.random_range(50..=1000);
        let symbols: Vec<String> = (0..len).map(|_| rng.random_range(0..alphabet).to_string()).collect();
        let stats = TraceStatistics::new(symbols.iter(), 5).unwrap();
        for j in 0..5 {
            let (h0, h1) = (stats.entropy(j).unwrap(), stats.entropy(j + 1).unwrap());
            check(h1 <= h0 + 1e-12, || format!("trace {t}: h_{} = {h1} > h_{j} = {h0}", j + 1))?;
        }
    }
    Ok("50 random sets (monotonicity, Kraft, class addition, slowdown, scaling by 2/3/10); 20 random traces".into())
}

fn cli_determinism() -> Outcome {
    for (name, args) in common::EXAMPLES {
        let a = common::run_json(args);
        let b = common::run_json(args);
        check(a.status.success(), || format!("{name}: {}", String::from_utf8_lossy(&a.stderr)))?;
        check(a.stdout == b.stdout, || format!("{name}: runs differ"))?;
        let golden = std::fs::read(common::golden_dir().join(format!("{name}.json"))).unwrap_or_default();
        check(golden == a.stdout, || format!("{name}: differs from golden"))?;
    }
    Ok(format!("{} bundled examples byte-identical across two runs and to goldens", common::EXAMPLES.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("MIX reproduction", mix),
        ("MMIX reproduction", mmix),
        ("closed-form suite", closed_forms),
        ("counting oracle convergence", oracle),
        ("capacity-achieving distribution identity", optimal_identity),
        ("memory example", memory_example),
        ("optimizer oracle", optimizer_oracle),
        ("property suites", properties),
        ("CLI determinism", cli_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
