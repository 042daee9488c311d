use edcast_core::datagen::{generate_arrivals, ArrivalGenConfig};
use edcast_core::diagnostics::{acf, default_ljung_box_lag, ljung_box};
use edcast_core::sarima::{auto_select, Criterion, SearchStrategy, SelectBounds};
use std::time::Instant;

fn main() {
    let mut pass = 0;
    let seeds = 8u64;
    let t0 = Instant::now();
    for seed in 0..seeds {
        let cfg = ArrivalGenConfig { seed: 42 + seed, ..ArrivalGenConfig::default() };
        let s = generate_arrivals(&cfg).unwrap();
        let t1 = Instant::now();
        let best = auto_select(&s, 24, &SelectBounds::default(), Criterion::Bic, SearchStrategy::Stepwise).unwrap();
        let h = default_ljung_box_lag(best.residuals.len(), Some(24));
        let lb = ljung_box(&best.residuals, h, best.order.num_coeffs()).unwrap();
        if lb.p_value > 0.05 { pass += 1; }
        let a = acf(&best.residuals, 48).unwrap();
        println!("seed {}: {} in {:.1?}, LB p = {:.4}, r24 = {:+.3}, r48 = {:+.3}",
            42+seed, best.model_label(), t1.elapsed(), lb.p_value, a.coefficients[23], a.coefficients[47]);
    }
    println!("LB pass: {pass}/{seeds}, total {:.1?}", t0.elapsed());
}
