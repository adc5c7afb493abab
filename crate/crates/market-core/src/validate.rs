//! Input invariant checking for market instances.

use crate::market::Market;
use std::fmt;

/// One broken input invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Participant or field the violation belongs to, e.g. "u3" or "p1/type1".
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.detail)
    }
}

/// Checks every structural invariant of a market instance; an empty result
/// means the instance is usable.
pub fn validate(market: &Market) -> Vec<Violation> {
    let mut out = Vec::new();
    let k = market.types;
    if k == 0 {
        out.push(Violation {
            subject: "market".into(),
            detail: "at least one instance type is required".into(),
        });
    }

    for (id, bid) in &market.users {
        let subj = id.to_string();
        if bid.user != *id {
            out.push(Violation {
                subject: subj.clone(),
                detail: format!("bid carries mismatched id {}", bid.user),
            });
        }
        if bid.demand.len() != k {
            out.push(Violation {
                subject: subj.clone(),
                detail: format!("demand has {} entries, expected {k}", bid.demand.len()),
            });
        }
        if bid.demand.iter().all(|&d| d == 0) {
            out.push(Violation {
                subject: subj.clone(),
                detail: "requests no instances of any type".into(),
            });
        }
        if bid.length == 0 {
            out.push(Violation {
                subject: subj.clone(),
                detail: "requested length is zero".into(),
            });
        }
        if bid.window.is_empty() {
            out.push(Violation {
                subject: subj.clone(),
                detail: format!(
                    "window ({}, {}] contains no slots",
                    bid.window.start, bid.window.end
                ),
            });
        } else if bid.window.len() < bid.length {
            out.push(Violation {
                subject: subj.clone(),
                detail: format!(
                    "window ({}, {}] has {} slots, shorter than requested length {}",
                    bid.window.start,
                    bid.window.end,
                    bid.window.len(),
                    bid.length
                ),
            });
        }
        if bid.valuation.is_negative() {
            out.push(Violation {
                subject: subj,
                detail: format!("valuation {} is negative", bid.valuation),
            });
        }
    }

    for (id, offer) in &market.providers {
        let subj = id.to_string();
        if offer.provider != *id {
            out.push(Violation {
                subject: subj.clone(),
                detail: format!("offer carries mismatched id {}", offer.provider),
            });
        }
        if offer.supply.len() != k {
            out.push(Violation {
                subject: subj.clone(),
                detail: format!("supply has {} entries, expected {k}", offer.supply.len()),
            });
        }
        if offer.curves.len() != k {
            out.push(Violation {
                subject: subj.clone(),
                detail: format!("{} price curves, expected {k}", offer.curves.len()),
            });
        }
        if offer.window.is_empty() {
            out.push(Violation {
                subject: subj.clone(),
                detail: format!(
                    "window ({}, {}] contains no slots",
                    offer.window.start, offer.window.end
                ),
            });
        }
        for (t, curve) in offer.curves.iter().enumerate() {
            let subj_t = format!("{subj}/type{}", t + 1);
            let expected = offer.supply.get(t).copied().unwrap_or(0);
            if curve.len() != expected {
                out.push(Violation {
                    subject: subj_t.clone(),
                    detail: format!(
                        "curve covers {} quantities, expected supply {expected}",
                        curve.len()
                    ),
                });
            }
            let prices = curve.prices();
            if prices.iter().any(|p| p.is_negative()) {
                out.push(Violation {
                    subject: subj_t.clone(),
                    detail: "negative unit price".into(),
                });
            }
            for w in prices.windows(2) {
                if w[1] > w[0] {
                    out.push(Violation {
                        subject: subj_t,
                        detail: format!(
                            "unit prices must not increase with volume ({} then {})",
                            w[0], w[1]
                        ),
                    });
                    break;
                }
            }
        }
    }

    out
}
