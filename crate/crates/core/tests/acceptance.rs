//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible with `cargo test --test acceptance -- --nocapture`).

mod common;

use std::time::Instant;

use bpdiff_core::{
    bench, run, sample_initial, Algorithm, BenchSpec, DiffusionConfig, Model, OperatorContext,
    Oracle,
};
use common::*;

fn report(id: &str, pass: bool, detail: &str) {
    println!("[{}] {} {}", id, if pass { "PASS" } else { "FAIL" }, detail);
    assert!(pass, "{id}: {detail}");
}

#[test]
fn criterion_1_mobius_inversion_on_random_nerves() {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (nerve, shape) = random_closed_nerve(&mut r);
        let ctx = OperatorContext::new(&nerve, &shape).unwrap();
        let u = random_field0(&ctx, &mut r, 4.0);
        let back = ctx.mobius(&ctx.zeta(&u).unwrap()).unwrap();
        let err = max_abs_diff(&back, &u) / (1.0 + u.sup_norm());
        worst = worst.max(err);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 1",
        worst <= 1e-12 && elapsed < 10.0,
        &format!("mobius o zeta = id on 200 nerves: worst rel err {worst:.2e}, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_2_adjunction_of_d_and_delta() {
    let mut r = rng(102);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (nerve, shape) = random_closed_nerve(&mut r);
        let ctx = OperatorContext::new(&nerve, &shape).unwrap();
        for _ in 0..200 {
            let lambda = random_field0(&ctx, &mut r, 3.0);
            let phi = random_field1(&ctx, &mut r, 3.0);
            let lhs = ctx.differential(&lambda).unwrap().pairing(&phi).unwrap();
            let rhs = lambda.pairing(&ctx.divergence(&phi).unwrap()).unwrap();
            let err = (lhs - rhs).abs() / (1.0 + rhs.abs());
            worst = worst.max(err);
        }
    }
    report(
        "criterion 2",
        worst <= 1e-10,
        &format!("<d lambda, phi> = <lambda, delta phi>: worst rel err {worst:.2e}"),
    );
}

#[test]
fn criterion_3_energy_conservation_along_runs() {
    let model = Model::horn2();
    let ctx = model.context();
    let oracle = Oracle::new(ctx);

    let mut drift: f64 = 0.0;
    for seed in 0..50u64 {
        let u0 = sample_initial(model.nerve(), model.shape(), 1.0, seed).unwrap();
        let h0 = oracle.total_hamiltonian(&u0).unwrap();
        for alg in [Algorithm::Gbp, Algorithm::Bethe] {
            let mut m = model.clone();
            m.set_potential(u0.clone()).unwrap();
            let mut config = DiffusionConfig::new(alg, 0.5, 10);
            config.record_trajectory = true;
            config.residual_tolerance = 1e-300; // never stop early
            let rep = run(&m, &config).unwrap();
            for snapshot in &rep.potential_trace {
                let h = oracle.total_hamiltonian(snapshot).unwrap();
                for (a, b) in h.values().iter().zip(h0.values()) {
                    drift = drift.max((a - b).abs());
                }
            }
        }
    }

    let mut r = rng(103);
    let mut z_err: f64 = 0.0;
    for _ in 0..100 {
        let u = random_field0(&ctx, &mut r, 2.0);
        let phi = random_field1(&ctx, &mut r, 2.0);
        let mut shifted = u.clone();
        shifted.axpy(1.0, &ctx.divergence(&phi).unwrap()).unwrap();
        let z = oracle.log_partition(&u).unwrap();
        let z2 = oracle.log_partition(&shifted).unwrap();
        // Z equality in relative terms is log-partition closeness.
        z_err = z_err.max(((z - z2).exp() - 1.0).abs());
    }

    report(
        "criterion 3",
        drift <= 1e-9 && z_err <= 1e-10,
        &format!("hamiltonian drift {drift:.2e}, Z invariance rel err {z_err:.2e}"),
    );
}

#[test]
fn criterion_4_bethe_numbers() {
    let model = Model::horn2();
    let solved = bethe_by_linear_solve(model.nerve());
    let expected = vec![1i64, 1, 1, -1, -1, -1, 1];
    let horn_ok = solved == expected && model.nerve().bethe_numbers() == expected.as_slice();

    let mut r = rng(104);
    let mut identity_ok = true;
    for _ in 0..200 {
        let (nerve, _) = random_closed_nerve(&mut r);
        let n = nerve.face_count();
        for b in 0..n {
            let total: i64 = (0..n)
                .filter(|&a| nerve.includes(a, b))
                .map(|a| nerve.bethe_number(a))
                .sum();
            identity_ok &= total == 1;
        }
    }
    report(
        "criterion 4",
        horn_ok && identity_ok,
        &format!("2-horn numbers {solved:?}, defining equations exact on 200 nerves"),
    );
}

#[test]
fn criterion_5_gbp_fixed_point_faithfulness() {
    let model = Model::horn2();
    let ctx = model.context();
    let mut converged = 0usize;
    let mut worst_dq: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for seed in 0..50u64 {
        let u0 = sample_initial(model.nerve(), model.shape(), 1.0, seed).unwrap();
        let mut m = model.clone();
        m.set_potential(u0).unwrap();
        let config = DiffusionConfig::new(Algorithm::Gbp, 0.3, 2000);
        let rep = run(&m, &config).unwrap();
        if !rep.converged {
            continue;
        }
        converged += 1;
        assert!(rep.residual_final <= 1e-8);
        let dq = ctx
            .differential(rep.final_beliefs.field())
            .unwrap()
            .sup_norm();
        worst_dq = worst_dq.max(dq);
        for t in rep.final_beliefs.tensors() {
            let s: f64 = t.values().iter().sum();
            worst_norm = worst_norm.max((s - 1.0).abs());
        }
    }
    report(
        "criterion 5",
        converged >= 10 && worst_dq <= 1e-6 && worst_norm <= 1e-10,
        &format!(
            "{converged}/50 converged; worst |d(q)| {worst_dq:.2e}, worst normalization {worst_norm:.2e}"
        ),
    );
}

#[test]
fn criterion_6_oracle_agreement_on_solvable_instances() {
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for model in [single_top_model(), path3_model()] {
        let ctx = model.context();
        let oracle = Oracle::new(ctx);
        for seed in 0..50u64 {
            let u0 = sample_initial(model.nerve(), model.shape(), 1.0, seed).unwrap();
            let mut m = model.clone();
            m.set_potential(u0.clone()).unwrap();
            let truth = oracle.true_marginals(&u0).unwrap();
            for alg in [Algorithm::Gbp, Algorithm::Bethe] {
                let config = DiffusionConfig::new(alg, 0.5, 2000);
                let rep = run(&m, &config).unwrap();
                all_converged &= rep.converged;
                if rep.converged {
                    worst = worst.max(max_abs_diff(rep.final_beliefs.field(), truth.field()));
                }
            }
        }
    }
    report(
        "criterion 6",
        all_converged && worst <= 1e-6,
        &format!("all runs converged: {all_converged}; worst belief error {worst:.2e}"),
    );
}

#[test]
fn criterion_7_diffusivity_sweep_reproduces_the_qualitative_table() {
    let start = Instant::now();
    let model = Model::horn2();
    let spec = BenchSpec {
        seeds: 200,
        ..BenchSpec::default()
    };
    let table = bench(&model, &spec).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    // (a) at eps = 1.1 both algorithms converge on fewer than 10% of seeds
    // at every temperature.
    let mut a_ok = true;
    for &t in &spec.temperatures {
        for alg in [Algorithm::Gbp, Algorithm::Bethe] {
            let row = table.find(alg, 1.1, t).unwrap();
            a_ok &= row.converged_fraction < 0.10;
        }
    }

    // (b) some eps* < 1 in the grid where Bethe exceeds GBP by at least 20
    // percentage points.
    let mut best_gap: f64 = 0.0;
    let mut best_cell = (0.0, 0.0);
    for &e in &spec.diffusivities {
        if e >= 1.0 {
            continue;
        }
        for &t in &spec.temperatures {
            let g = table.find(Algorithm::Gbp, e, t).unwrap().converged_fraction;
            let b = table
                .find(Algorithm::Bethe, e, t)
                .unwrap()
                .converged_fraction;
            if b - g > best_gap {
                best_gap = b - g;
                best_cell = (e, t);
            }
        }
    }
    let b_ok = best_gap >= 0.20;

    // (c) at eps = 0.1, T = 10 both algorithms converge on more than 90%.
    let g = table
        .find(Algorithm::Gbp, 0.1, 10.0)
        .unwrap()
        .converged_fraction;
    let b = table
        .find(Algorithm::Bethe, 0.1, 10.0)
        .unwrap()
        .converged_fraction;
    let c_ok = g > 0.90 && b > 0.90;

    report(
        "criterion 7",
        a_ok && b_ok && c_ok && elapsed < 60.0,
        &format!(
            "(a) eps=1.1 fractions < 10%: {a_ok}; (b) best Bethe-GBP gap {:.0}pp at eps={}, T={}; (c) eps=0.1 T=10 fractions gbp={g} bethe={b}; sweep {elapsed:.1}s",
            best_gap * 100.0,
            best_cell.0,
            best_cell.1
        ),
    );
}

#[test]
fn criterion_8_gbp_and_bethe_coincide_on_graphs() {
    let model = path3_model();
    let ctx = model.context();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let u0 = sample_initial(model.nerve(), model.shape(), 1.0, seed).unwrap();
        let mut m = model.clone();
        m.set_potential(u0).unwrap();
        let mut reports = Vec::new();
        for alg in [Algorithm::Gbp, Algorithm::Bethe] {
            let mut config = DiffusionConfig::new(alg, 0.5, 10);
            config.record_trajectory = true;
            config.residual_tolerance = 1e-300; // keep both trajectories full length
            reports.push(run(&m, &config).unwrap());
        }
        let (gbp, bethe) = (&reports[0], &reports[1]);
        assert_eq!(gbp.potential_trace.len(), bethe.potential_trace.len());
        for (ug, ub) in gbp.potential_trace.iter().zip(&bethe.potential_trace) {
            let qg = ctx.beliefs(ug).unwrap();
            let qb = ctx.beliefs(ub).unwrap();
            worst = worst.max(max_abs_diff(qg.field(), qb.field()));
        }
    }
    report(
        "criterion 8",
        worst <= 1e-10,
        &format!("worst belief trajectory gap over 20 seeds x 10 iterations: {worst:.2e}"),
    );
}
