use mpesr_core::drive::DriveParams;
use mpesr_core::floquet::*;

fn main() {
    let d = DriveParams::with_defaults(1.5, 90.0).unwrap();
    for theta in [0.0, 33.0, 70.53, 90.0] {
        let dt = d.with_theta(theta).unwrap();
        let w = default_window(3, &dt).unwrap();
        match locate_resonance(3, &dt, w) {
            Ok(fix) => println!("theta={theta:6} center={:.6} gap={:e}", fix.center, fix.gap),
            Err(e) => println!("theta={theta:6} err: {e}  window={w:?}"),
        }
    }
}
