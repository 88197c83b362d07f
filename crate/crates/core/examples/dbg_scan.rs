use mpesr_core::drive::DriveParams;
use mpesr_core::floquet::*;
use mpesr_core::liouville::*;
use nalgebra::Vector3;

fn main() {
    let d = DriveParams::with_defaults(1.5, 0.0).unwrap();
    let w = default_window(3, &d).unwrap();
    println!("theta=0 window = {:?}", w);
    match locate_resonance(3, &d, w) {
        Ok(fix) => println!("fix: center={} gap={:e}", fix.center, fix.gap),
        Err(e) => println!("err: {e}"),
    }
    // scan the raw gap over the window
    for i in 0..=10 {
        let b0 = w.0 + (w.1 - w.0) * i as f64 / 10.0;
        let (p, tr) = converged_quasienergies(&d, b0, default_truncation(3), QUASIENERGY_TOL).unwrap();
        println!("b0={:9.5} gap={:12.6e} eps=({:+.6e},{:+.6e}) trunc={}", b0, p.gap, p.eps_minus, p.eps_plus, tr);
    }

    // propagate step doubling measurement
    let relax = RelaxationParams::default();
    let d2 = DriveParams::with_defaults(2.5, 90.0).unwrap();
    let s0 = DensityState::from_bloch(Vector3::new(0.1, 0.0, 1e-3));
    let r = propagate_period(&s0, &d2, 10.5, &relax, 4000).unwrap();
    for steps in [100usize, 250, 500, 1000, 2000] {
        let a = propagate_period(&s0, &d2, 10.5, &relax, steps).unwrap();
        let b = propagate_period(&s0, &d2, 10.5, &relax, 2 * steps).unwrap();
        println!(
            "steps={:5} |d(vs 2x)|={:.3e}  |d(vs 8000... ref 4000)|={:.3e}",
            steps,
            (a.bloch() - b.bloch()).norm(),
            (a.bloch() - r.bloch()).norm()
        );
    }
    // steady-state step doubling at the same point
    for steps in [500usize, 1000, 2000] {
        let sa = steady_state(&d2, 10.5, &relax, &SteadyStateOptions { steps_per_period: steps, ..Default::default() }).unwrap().signal;
        let sb = steady_state(&d2, 10.5, &relax, &SteadyStateOptions { steps_per_period: 2 * steps, ..Default::default() }).unwrap().signal;
        println!("ss steps={:5} S={:.9e} |dS|={:.3e}", steps, sa, (sa - sb).abs());
    }
}
