//! Checks backpropagation through the from-scratch MLP against central
//! finite differences. A ReLU pre-activation lying within the step of zero
//! makes the central difference straddle the kink and report a spurious
//! error near 0.5 for that unit's parameters; this seed avoids it.
//!
//! cargo run --release --example gradient_check

use cradar::cdrl::{Activation, Mlp};
use cradar::numerics::RngStream;

fn main() -> cradar::Result<()> {
    let mut rng = RngStream::new(1);
    for (hidden, out) in [(vec![16], Activation::Identity), (vec![32, 16], Activation::Sigmoid)] {
        let mut sizes = vec![6];
        sizes.extend(&hidden);
        sizes.push(2);
        let mut net = Mlp::new(&sizes, out, 0.0, &mut rng);
        let batch = 4;
        let x: Vec<f64> = (0..batch * 6).map(|_| rng.uniform(-1.0, 1.0)).collect();
        // loss = Σ y²/2, so ∂L/∂y = y
        let loss = |n: &Mlp| -> cradar::Result<f64> {
            Ok(n.forward(&x, batch)?.output().iter().map(|y| 0.5 * y * y).sum())
        };
        let cache = net.forward(&x, batch)?;
        let (grads, _) = net.backward(&cache, &cache.output().to_vec(), true)?;
        let h = 1e-5;
        let mut worst = 0.0f64;
        for i in 0..net.n_params() {
            let p = net.params()[i];
            net.params_mut()[i] = p + h;
            let up = loss(&net)?;
            net.params_mut()[i] = p - h;
            let down = loss(&net)?;
            net.params_mut()[i] = p;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((grads[i] - fd).abs() / grads[i].abs().max(fd.abs()).max(1e-6));
        }
        println!("layers {sizes:?} ({out:?} head): {} parameters, max relative error {worst:.2e}", net.n_params());
    }
    Ok(())
}
