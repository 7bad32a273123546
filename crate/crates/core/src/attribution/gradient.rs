use super::{AttributionResult, MethodKind, ScalarFunction};
use crate::error::{Result, TrimError};

/// Gradient evaluations per batched call along the integration path.
const PATH_CHUNK: usize = 64;

fn check(f: &(impl ScalarFunction + ?Sized), x: &[f64], baseline: &[f64]) -> Result<()> {
    if x.len() != f.dim() {
        return Err(TrimError::dim("attribution input", f.dim(), x.len()));
    }
    if baseline.len() != x.len() {
        return Err(TrimError::dim(
            "attribution baseline",
            x.len(),
            baseline.len(),
        ));
    }
    Ok(())
}

/// Integrated gradients on the straight path from `baseline` to `x`, using a
/// midpoint Riemann sum with `steps` nodes at `(j + ½)/steps`.
pub fn integrated_gradients(
    f: &(impl ScalarFunction + ?Sized),
    x: &[f64],
    baseline: &[f64],
    steps: usize,
) -> Result<AttributionResult> {
    check(f, x, baseline)?;
    if steps == 0 {
        return Err(TrimError::InvalidArgument(
            "integrated gradients needs at least one step".into(),
        ));
    }
    let d = x.len();
    let diff: Vec<f64> = x.iter().zip(baseline).map(|(a, b)| a - b).collect();
    let mut grad_sum = vec![0.0; d];
    if diff.iter().any(|&v| v != 0.0) {
        let mut points = Vec::with_capacity(PATH_CHUNK * d);
        let mut j = 0;
        while j < steps {
            let end = (j + PATH_CHUNK).min(steps);
            points.clear();
            for step in j..end {
                let alpha = (step as f64 + 0.5) / steps as f64;
                points.extend(baseline.iter().zip(&diff).map(|(b, dv)| b + alpha * dv));
            }
            for g in f.gradients(&points).chunks(d) {
                grad_sum.iter_mut().zip(g).for_each(|(s, gv)| *s += gv);
            }
            j = end;
        }
    }
    let scores: Vec<f64> = diff
        .iter()
        .zip(&grad_sum)
        .map(|(dv, g)| dv * g / steps as f64)
        .collect();
    let output = f.value(x);
    let baseline_output = f.value(baseline);
    let gap = (scores.iter().sum::<f64>() - (output - baseline_output)).abs();
    Ok(AttributionResult {
        method: MethodKind::Ig,
        scores,
        completeness_gap: Some(gap),
        output,
        baseline_output,
        standard_errors: None,
    })
}

/// `(x − baseline) ⊙ ∇f(x)`.
///
/// For a ReLU network this is the DeepLIFT rescale attribution whenever `x`
/// and `baseline` share an activation pattern, and it is exact on that
/// linear region.
pub fn input_x_gradient(
    f: &(impl ScalarFunction + ?Sized),
    x: &[f64],
    baseline: &[f64],
) -> Result<AttributionResult> {
    check(f, x, baseline)?;
    let grad = f.gradient(x);
    let scores: Vec<f64> = x
        .iter()
        .zip(baseline)
        .zip(&grad)
        .map(|((a, b), g)| (a - b) * g)
        .collect();
    let output = f.value(x);
    let baseline_output = f.value(baseline);
    let gap = (scores.iter().sum::<f64>() - (output - baseline_output)).abs();
    Ok(AttributionResult {
        method: MethodKind::InputXGradient,
        scores,
        completeness_gap: Some(gap),
        output,
        baseline_output,
        standard_errors: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::ModelOutput;
    use crate::model::{init_params, Layer, MlpModel, MlpSpec, OutputHead};
    use crate::numeric::{NdArray, SeededRng};

    fn linear(w: Vec<f64>, b: f64) -> MlpModel {
        let spec = MlpSpec::new(vec![w.len(), 1], OutputHead::Identity).unwrap();
        MlpModel::from_layers(
            spec,
            vec![Layer {
                weights: NdArray::new(vec![1, w.len()], w).unwrap(),
                bias: vec![b],
            }],
        )
        .unwrap()
    }

    #[test]
    fn linear_model_scores() {
        let m = linear(vec![1.5, -2.0, 0.5], 3.0);
        let f = ModelOutput::new(&m);
        let x = [2.0, 1.0, -4.0];
        let zero = [0.0; 3];
        for steps in [1, 7, 100] {
            let ig = integrated_gradients(&f, &x, &zero, steps).unwrap();
            assert_eq!(ig.scores, vec![3.0, -2.0, -2.0]);
        }
        let ixg = input_x_gradient(&f, &x, &zero).unwrap();
        assert_eq!(ixg.scores, vec![3.0, -2.0, -2.0]);
    }

    #[test]
    fn baseline_equal_to_input() {
        let spec = MlpSpec::new(vec![4, 8, 1], OutputHead::Identity).unwrap();
        let m = init_params(&spec, &mut SeededRng::new(2)).unwrap();
        let x = [0.3, -1.0, 2.0, 0.7];
        let ig = integrated_gradients(&ModelOutput::new(&m), &x, &x, 16).unwrap();
        assert!(ig.scores.iter().all(|&s| s == 0.0));
        assert_eq!(ig.completeness_gap, Some(0.0));
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = linear(vec![1.0, 1.0], 0.0);
        let f = ModelOutput::new(&m);
        assert!(integrated_gradients(&f, &[1.0, 2.0], &[0.0], 4).is_err());
        assert!(integrated_gradients(&f, &[1.0, 2.0], &[0.0, 0.0], 0).is_err());
        assert!(input_x_gradient(&f, &[1.0], &[0.0]).is_err());
    }
}
