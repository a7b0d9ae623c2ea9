//! Vacuum subtraction: a result minus the same computation at `g = 0`.

use crate::correlator::{ProbeResult, Provenance, TermBreakdown};
use crate::error::{Error, Result};
use crate::numeric::DoubleF64;
use crate::stats::Sample;

fn mismatch(what: &str) -> Error {
    Error::RenormalizationMismatch(what.to_string())
}

/// Pointwise `with_g − g0`.
///
/// Monte Carlo inputs must come from the same random stream; the difference
/// is taken per realization so that the error bars see the common-noise
/// cancellation.
pub fn renormalize<P, V>(
    with_g: &ProbeResult<P, V>,
    g0: &ProbeResult<P, V>,
) -> Result<ProbeResult<P, V>>
where
    P: Clone + PartialEq,
    V: Sample,
{
    if with_g.context != g0.context {
        return Err(mismatch(&format!(
            "contexts differ: {:?} vs {:?}",
            with_g.context, g0.context
        )));
    }
    if with_g.probes != g0.probes {
        return Err(mismatch("probe sets differ"));
    }
    match (&with_g.mc, &g0.mc) {
        (Some(a), Some(b)) => {
            let diff = a.paired_difference(b)?;
            let mut out = ProbeResult::monte_carlo(with_g.probes.clone(), diff, with_g.context);
            out.provenance = Provenance::SfRenormalized;
            Ok(out)
        }
        (None, None) => {
            let values = with_g
                .values
                .iter()
                .zip(&g0.values)
                .map(|(&a, &b)| a - b)
                .collect();
            let terms = match (&with_g.terms, &g0.terms) {
                (Some(a), Some(b)) => Some(TermBreakdown {
                    coherent: a.coherent.iter().zip(&b.coherent).map(|(&x, &y)| x - y).collect(),
                    incoherent: a
                        .incoherent
                        .iter()
                        .zip(&b.incoherent)
                        .map(|(&x, &y)| x - y)
                        .collect(),
                }),
                _ => None,
            };
            Ok(ProbeResult::closed_form(
                with_g.probes.clone(),
                values,
                terms,
                Provenance::SfRenormalized,
                with_g.context,
            ))
        }
        _ => Err(mismatch("cannot subtract a closed form from a Monte Carlo estimate")),
    }
}

/// `N_SF − N_SF|g=0`, rounded once.
pub fn renormalize_energy(with_g: DoubleF64, g0: DoubleF64) -> f64 {
    (with_g - g0).value()
}
