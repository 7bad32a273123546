use crate::numeric::{NdArray, SeededRng};

/// Samples that are sparse combinations of a fixed random dictionary.
#[derive(Clone, Debug)]
pub struct SparseFixture {
    /// `samples × n`.
    pub data: NdArray,
    /// `n × atoms`, unit-norm columns.
    pub dictionary: NdArray,
    /// `samples × atoms`, `active` nonzeros per row.
    pub codes: NdArray,
}

/// Draws `samples` signals of length `n`, each a combination of `active`
/// distinct atoms (out of `atoms`) with standard normal weights.
///
/// # Panics
/// If `active > atoms`.
pub fn sparse_fixture(
    n: usize,
    atoms: usize,
    samples: usize,
    active: usize,
    rng: &mut SeededRng,
) -> SparseFixture {
    assert!(active <= atoms, "cannot activate {active} of {atoms} atoms");
    let mut dict = vec![0.0; n * atoms];
    for a in 0..atoms {
        let col: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (i, v) in col.iter().enumerate() {
            dict[i * atoms + a] = v / norm;
        }
    }
    let dictionary = NdArray::new(vec![n, atoms], dict).expect("shape matches");

    let mut codes = NdArray::zeros(&[samples, atoms]);
    let mut order: Vec<usize> = (0..atoms).collect();
    for r in 0..samples {
        rng.shuffle(&mut order);
        for &a in &order[..active] {
            codes.set(r, a, rng.normal());
        }
    }
    let data = codes
        .matmul(&dictionary.transpose().expect("2-D"))
        .expect("shapes match");
    SparseFixture {
        data,
        dictionary,
        codes,
    }
}
