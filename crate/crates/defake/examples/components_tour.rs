//! A tour of the reusable numerical components: the orthonormal 2-D DCT,
//! the normalized graph convolution, co-attention fusion, and the gradient
//! reversal layer.
//!
//! ```sh
//! cargo run --example components_tour
//! ```

use ndarray::{array, Array2, Array3};

use defake::models::components::{dct2d, gcn_layer, idct2d, Activation, CoAttention};
use defake::tensor::{ParamInit, ParamStore, Tape};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // --- 2-D DCT: energy compaction and perfect reconstruction ---
    let block = Array2::from_shape_fn((8, 8), |(i, j)| ((i + j) as f64 * 0.4).sin());
    let coeffs = dct2d(block.view())?;
    let energy: f64 = coeffs.iter().map(|c| c * c).sum();
    let dc = coeffs[(0, 0)];
    println!("DCT: total energy {energy:.4}, DC coefficient {dc:.4}");
    let back = idct2d(coeffs.view())?;
    let max_err = block
        .iter()
        .zip(back.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("DCT round-trip max error: {max_err:.2e}");

    // --- Graph convolution on a 4-node star graph ---
    let adjacency = array![
        [0.0, 1.0, 1.0, 1.0],
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
    ];
    let features = Array2::from_shape_fn((4, 3), |(i, j)| (i as f64 - j as f64) * 0.5);
    let weights = Array2::from_shape_fn((3, 2), |(i, j)| 0.3 * (i + 1) as f64 - 0.2 * j as f64);
    let store = ParamStore::new();
    let mut tape = Tape::new(&store);
    let x = tape.constant(features.into_dyn());
    let w = tape.constant(weights.into_dyn());
    let h = gcn_layer(&mut tape, x, adjacency.view(), w, Activation::Relu)?;
    println!("GCN output (one row per node):\n{:.4}", tape.value(h));

    // --- Co-attention fusion of a text and an image sequence ---
    let mut store = ParamStore::new();
    let mut init = ParamInit::new(7);
    let co = CoAttention::new(&mut store, &mut init, "co", 4)?;
    let mut tape = Tape::new(&store);
    let text = tape.constant(Array3::from_shape_fn((1, 5, 4), |(_, l, d)| {
        ((l * 4 + d) as f64 * 0.37).cos()
    }).into_dyn());
    let image = tape.constant(Array3::from_shape_fn((1, 3, 4), |(_, l, d)| {
        ((l * 4 + d) as f64 * 0.11).sin()
    }).into_dyn());
    let fused = co.forward(&mut tape, text, image)?;
    println!(
        "co-attention fused vector ({} dims): {:.4}",
        tape.value(fused).len(),
        tape.value(fused)
    );

    // --- Gradient reversal: identity forward, -lambda backward ---
    let mut store = ParamStore::new();
    let w = store.register("w", ndarray::ArrayD::from_elem(ndarray::IxDyn(&[2, 2]), 0.5))?;
    let lambda = 1.5;
    let mut tape = Tape::new(&store);
    let x = tape.constant(array![[1.0, -2.0]].into_dyn());
    let wn = tape.param(w);
    let h = tape.matmul(x, wn)?;
    let reversed = tape.grad_reverse(h, lambda)?;
    println!(
        "reversal forward is the identity: {} == {}",
        tape.value(h), tape.value(reversed)
    );
    let loss = tape.cross_entropy_mean(reversed, &[0])?;
    let grads = tape.backward(loss);
    println!(
        "gradient through the reversal (note the flipped sign):\n{:.4}",
        grads[&w]
    );
    Ok(())
}
