use super::optim::{clip_global_norm, Optimizer, TrainConfig};
use super::Params;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Mini-batch gradient descent over `n` samples.
///
/// `batch_grad(model, batch, noise_rng)` returns the mean loss over the batch
/// and the flat gradient of that mean. Batches are drawn from a fresh seeded
/// permutation every epoch; a batch size larger than `n` is clamped to `n`.
/// Returns the per-epoch mean training loss.
pub fn fit_minibatch<M, F>(
    model: &mut M,
    n: usize,
    cfg: &TrainConfig,
    mut batch_grad: F,
) -> Result<Vec<f64>>
where
    M: Params,
    F: FnMut(&M, &[usize], &mut SeededRng) -> Result<(f64, Vec<f64>)>,
{
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Empty("training set"));
    }
    let batch = cfg.batch_size.min(n);
    let mut order_rng = SeededRng::derive(cfg.seed, 1);
    let mut noise_rng = SeededRng::derive(cfg.seed, 2);
    let mut opt = Optimizer::new(cfg, model.n_params());
    let mut flat = model.to_flat();
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let order = order_rng.permutation(n);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let (loss, mut grads) =
                batch_grad(model, chunk, &mut noise_rng).map_err(|e| match e {
                    Error::NonFinite(what) => Error::Divergence {
                        epoch,
                        detail: what,
                    },
                    other => other,
                })?;
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence {
                    epoch,
                    detail: format!("non-finite loss or gradient (loss = {loss})"),
                });
            }
            if let Some(c) = cfg.clip_norm {
                clip_global_norm(&mut grads, c);
            }
            opt.step(&mut flat, &grads)?;
            if flat.iter().any(|p| !p.is_finite()) {
                return Err(Error::Divergence {
                    epoch,
                    detail: "non-finite parameter after update".into(),
                });
            }
            model.set_flat(&flat);
            epoch_loss += loss * chunk.len() as f64;
        }
        trace.push(epoch_loss / n as f64);
    }
    Ok(trace)
}
