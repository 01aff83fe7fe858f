use super::{GrandCanonical, OccupancyVector};
use crate::error::{domain, Result, ZrpError};
use rand::Rng;

/// Redraws grand-canonical configurations until `S_n = m`.
///
/// Exact but only practical below the critical density, where `P(S_n = m)` is not small.
pub fn rejection_canonical_sample<R: Rng + ?Sized>(
    gc: &GrandCanonical,
    m: u64,
    max_attempts: u64,
    rng: &mut R,
) -> Result<OccupancyVector> {
    if max_attempts == 0 {
        return domain("max_attempts must be at least 1");
    }
    let n = gc.len();
    let mut counts = vec![0u32; n];
    for _ in 0..max_attempts {
        let mut total = 0u64;
        let mut over = false;
        for (i, c) in counts.iter_mut().enumerate() {
            *c = gc.draw_site(i, rng);
            total += u64::from(*c);
            if total > m {
                over = true;
                break;
            }
        }
        if !over && total == m {
            return Ok(OccupancyVector::canonical(counts));
        }
    }
    Err(ZrpError::Exhausted(max_attempts))
}
