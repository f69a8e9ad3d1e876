//! Min-plus network calculus engine: token-bucket arrival curves,
//! rate-latency service curves, per-queue CBS delay bounds and minimal
//! idleSlope solving.
//!
//! Conventions: rates in bit/s, bursts and frame sizes in bits,
//! durations in microseconds. All functions are pure and safe to call
//! concurrently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest frame that can block a CBS queue from below: a maximal
/// best-effort Ethernet frame of 1522 bytes. Frame sizes are used as
/// given, without preamble/IFG inflation.
pub const L_LOW_DEFAULT_BITS: f64 = 1522.0 * 8.0;

/// Token-bucket arrival curve `alpha(t) = B + r * t`.
///
/// The aggregate of token buckets is the token bucket `(sum B, sum r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenBucketCurve {
    pub burst_bits: f64,
    pub rate_bps: f64,
}

impl TokenBucketCurve {
    pub const ZERO: TokenBucketCurve = TokenBucketCurve {
        burst_bits: 0.0,
        rate_bps: 0.0,
    };

    pub fn new(burst_bits: f64, rate_bps: f64) -> Result<Self> {
        if !burst_bits.is_finite() || !rate_bps.is_finite() || burst_bits < 0.0 || rate_bps < 0.0 {
            return Err(Error::Validation(format!(
                "token bucket (B={burst_bits}, r={rate_bps}) must be non-negative"
            )));
        }
        Ok(Self {
            burst_bits,
            rate_bps,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.burst_bits == 0.0 && self.rate_bps == 0.0
    }

    /// `n` copies of this bucket; `n` may be fractional.
    pub fn scaled(&self, n: f64) -> Self {
        Self {
            burst_bits: self.burst_bits * n,
            rate_bps: self.rate_bps * n,
        }
    }
}

impl std::ops::Add for TokenBucketCurve {
    type Output = TokenBucketCurve;

    fn add(self, rhs: TokenBucketCurve) -> TokenBucketCurve {
        TokenBucketCurve {
            burst_bits: self.burst_bits + rhs.burst_bits,
            rate_bps: self.rate_bps + rhs.rate_bps,
        }
    }
}

impl std::ops::AddAssign for TokenBucketCurve {
    fn add_assign(&mut self, rhs: TokenBucketCurve) {
        self.burst_bits += rhs.burst_bits;
        self.rate_bps += rhs.rate_bps;
    }
}

/// Rate-latency service curve `beta(t) = R * max(0, t - T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateLatencyCurve {
    pub rate_bps: f64,
    pub latency_us: f64,
}

impl RateLatencyCurve {
    pub fn new(rate_bps: f64, latency_us: f64) -> Result<Self> {
        if !rate_bps.is_finite() || rate_bps <= 0.0 {
            return Err(Error::Validation(format!(
                "service rate {rate_bps} must be > 0"
            )));
        }
        if !latency_us.is_finite() || latency_us < 0.0 {
            return Err(Error::Validation(format!(
                "service latency {latency_us} must be >= 0"
            )));
        }
        Ok(Self {
            rate_bps,
            latency_us,
        })
    }
}

/// Worst-case delay as the horizontal deviation `h(alpha, beta) = T + B/R`,
/// in microseconds.
pub fn delay_bound(arrival: TokenBucketCurve, service: RateLatencyCurve) -> Result<f64> {
    if arrival.rate_bps > service.rate_bps {
        return Err(Error::Instability {
            arrival_bps: arrival.rate_bps,
            service_bps: service.rate_bps,
        });
    }
    Ok(service.latency_us + arrival.burst_bits / service.rate_bps * 1e6)
}

/// Higher-priority CBS class as seen from a lower queue: its reserved
/// idleSlope and the maximal frame that can block it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CbsClass {
    pub idle_slope_bps: f64,
    pub l_low_bits: f64,
}

/// Latency term of the per-class CBS service curve, in microseconds:
///
/// `T_i = (L_low_i + sum_{j<i} hiCredit_j) / C` with
/// `hiCredit_j = idleSlope_j * L_low_j / C` (in bits).
pub fn cbs_latency_us(higher: &[CbsClass], l_low_bits: f64, link_rate_bps: f64) -> f64 {
    let credit_bits: f64 = higher
        .iter()
        .map(|class| class.idle_slope_bps * class.l_low_bits / link_rate_bps)
        .sum();
    (l_low_bits + credit_bits) / link_rate_bps * 1e6
}

/// Rate-latency service curve of CBS queue `i` given the classes above it.
///
/// `higher` lists queues `1..i` in priority order; the curve has rate
/// `idleSlope_i` and the latency term of [`cbs_latency_us`].
pub fn cbs_service_curve(
    higher: &[CbsClass],
    idle_slope_bps: f64,
    l_low_bits: f64,
    link_rate_bps: f64,
) -> Result<RateLatencyCurve> {
    if !link_rate_bps.is_finite() || link_rate_bps <= 0.0 {
        return Err(Error::Validation(format!(
            "link rate {link_rate_bps} must be > 0"
        )));
    }
    if !idle_slope_bps.is_finite() || idle_slope_bps <= 0.0 {
        return Err(Error::Validation(format!(
            "idleSlope {idle_slope_bps} must be > 0"
        )));
    }
    if !l_low_bits.is_finite() || l_low_bits < 0.0 {
        return Err(Error::Validation(format!(
            "L_low {l_low_bits} must be >= 0"
        )));
    }
    let total: f64 = higher.iter().map(|c| c.idle_slope_bps).sum::<f64>() + idle_slope_bps;
    if total > link_rate_bps {
        return Err(Error::Validation(format!(
            "sum of idleSlopes {total} exceeds link rate {link_rate_bps}"
        )));
    }
    RateLatencyCurve::new(
        idle_slope_bps,
        cbs_latency_us(higher, l_low_bits, link_rate_bps),
    )
}

/// Smallest idleSlope meeting delay bound `D` for `arrival` behind a CBS
/// latency term `T`: `max(r, B / (D - T))`. Monotone non-increasing in
/// `D` and non-decreasing in the arrival curve.
pub fn min_idle_slope(target_us: f64, arrival: TokenBucketCurve, latency_us: f64) -> Result<f64> {
    if arrival.is_zero() {
        return Ok(0.0);
    }
    if target_us <= latency_us {
        return Err(Error::Infeasible(format!(
            "delay bound {target_us} us not above the CBS latency term {latency_us} us"
        )));
    }
    let burst_slope = arrival.burst_bits / ((target_us - latency_us) * 1e-6);
    Ok(arrival.rate_bps.max(burst_slope))
}

/// Per-queue inputs to a port feasibility check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueueState {
    /// Configured delay bound D of the queue, in microseconds.
    pub bound_us: f64,
    /// Aggregate arrival of the traffic mapped to the queue.
    pub aggregate: TokenBucketCurve,
    /// Maximal lower-priority frame blocking this queue, in bits.
    pub l_low_bits: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfeasibleCause {
    /// The sum of minimal idleSlopes exceeds the reservable link rate.
    Bandwidth,
    /// A queue's bound is not above its CBS latency term.
    Latency,
}

/// Structured infeasibility verdict of [`port_feasible`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PortInfeasible {
    /// 1-based priority index of the queue that failed.
    pub queue: usize,
    pub cause: InfeasibleCause,
}

impl std::fmt::Display for PortInfeasible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let cause = match self.cause {
            InfeasibleCause::Bandwidth => "bandwidth",
            InfeasibleCause::Latency => "latency",
        };
        write!(f, "queue {} infeasible ({cause})", self.queue)
    }
}

/// Recomputes minimal idleSlopes for a port top-down in priority order
/// (the latency term of queue `i` depends on the idleSlopes of queues
/// above it) and checks the reservable-rate budget.
///
/// Returns the per-queue minimal idleSlopes on success. Empty queues get
/// slope 0 and do not contribute credit latency. The result is a fixed
/// point: re-running on a port configured with these slopes changes
/// nothing.
pub fn port_feasible(
    queues: &[QueueState],
    link_rate_bps: f64,
    reservable_fraction: f64,
) -> std::result::Result<Vec<f64>, PortInfeasible> {
    let mut higher: Vec<CbsClass> = Vec::with_capacity(queues.len());
    let mut slopes = Vec::with_capacity(queues.len());
    let budget = link_rate_bps * reservable_fraction;
    let mut total = 0.0;
    for (i, queue) in queues.iter().enumerate() {
        let slope = if queue.aggregate.is_zero() {
            0.0
        } else {
            let latency = cbs_latency_us(&higher, queue.l_low_bits, link_rate_bps);
            match min_idle_slope(queue.bound_us, queue.aggregate, latency) {
                Ok(slope) => slope,
                Err(_) => {
                    return Err(PortInfeasible {
                        queue: i + 1,
                        cause: InfeasibleCause::Latency,
                    })
                }
            }
        };
        total += slope;
        if total > budget {
            return Err(PortInfeasible {
                queue: i + 1,
                cause: InfeasibleCause::Bandwidth,
            });
        }
        higher.push(CbsClass {
            idle_slope_bps: slope,
            l_low_bits: queue.l_low_bits,
        });
        slopes.push(slope);
    }
    Ok(slopes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tb(burst: f64, rate: f64) -> TokenBucketCurve {
        TokenBucketCurve::new(burst, rate).unwrap()
    }

    /// Independent numeric oracle: sample the horizontal deviation on a
    /// dense grid, finding for each t the smallest d with
    /// `beta(t + d) >= alpha(t)` by bisection.
    pub(crate) fn numeric_horizontal_deviation(
        arrival: TokenBucketCurve,
        service: RateLatencyCurve,
        samples: usize,
    ) -> f64 {
        let alpha = |t_us: f64| arrival.burst_bits + arrival.rate_bps * t_us * 1e-6;
        let beta = |t_us: f64| service.rate_bps * ((t_us - service.latency_us).max(0.0)) * 1e-6;
        // A horizon long enough that the deviation maximum (attained at
        // t = 0 for token-bucket vs rate-latency) is well inside.
        let horizon_us =
            4.0 * (service.latency_us + arrival.burst_bits / service.rate_bps * 1e6 + 1.0);
        let mut worst: f64 = 0.0;
        for k in 0..samples {
            let t = horizon_us * k as f64 / samples as f64;
            let demand = alpha(t);
            let mut lo = 0.0;
            let mut hi = 2.0 * horizon_us + service.latency_us;
            debug_assert!(beta(t + hi) >= demand);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if beta(t + mid) >= demand {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            worst = worst.max(hi);
        }
        worst
    }

    #[test]
    fn delay_bound_matches_hand_value() {
        let arrival = tb(12_000.0, 10e6);
        let service = RateLatencyCurve::new(100e6, 10.0).unwrap();
        let d = delay_bound(arrival, service).unwrap();
        assert!((d - 130.0).abs() < 1e-9, "expected 130 us, got {d}");
        let oracle = numeric_horizontal_deviation(arrival, service, 500);
        assert!(
            (d - oracle).abs() / d < 1e-9,
            "closed form {d} vs oracle {oracle}"
        );
    }

    #[test]
    fn empty_arrival_sees_pure_latency() {
        let service = RateLatencyCurve::new(100e6, 42.0).unwrap();
        assert_eq!(delay_bound(TokenBucketCurve::ZERO, service).unwrap(), 42.0);
    }

    #[test]
    fn unstable_pair_errors() {
        let service = RateLatencyCurve::new(10e6, 0.0).unwrap();
        match delay_bound(tb(0.0, 20e6), service) {
            Err(Error::Instability { .. }) => {}
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn cbs_latency_highest_queue() {
        // idleSlope 500 Mbit/s, C = 1 Gbit/s, L_low = 12336 bits -> T1 = 12.336 us
        let curve = cbs_service_curve(&[], 500e6, 12_336.0, 1e9).unwrap();
        assert!((curve.latency_us - 12.336).abs() < 1e-12);
        assert_eq!(curve.rate_bps, 500e6);

        // Cross-check with a discrete-event worst case: a maximal
        // lower-priority frame seizes the port right before the first
        // class frame arrives; the class frame starts after L_low/C.
        let sim = single_port_blocking_delay_us(12_336.0, 1e9);
        assert!((curve.latency_us - sim).abs() < 1e-12);
    }

    /// Worst-case start-of-service delay for the highest CBS class on an
    /// otherwise idle port: one maximal lower-priority frame begins
    /// transmission at t = 0^- and cannot be preempted.
    fn single_port_blocking_delay_us(l_low_bits: f64, link_rate_bps: f64) -> f64 {
        let mut t_us = 0.0;
        // the blocking frame transmits to completion
        t_us += l_low_bits / link_rate_bps * 1e6;
        // credit accrued during blocking is >= 0, so the class frame
        // starts immediately afterwards
        t_us
    }

    #[test]
    fn cbs_latency_without_blocking_is_zero() {
        let curve = cbs_service_curve(&[], 500e6, 0.0, 1e9).unwrap();
        assert_eq!(curve.latency_us, 0.0);
    }

    #[test]
    fn idle_higher_class_contributes_nothing() {
        let alone = cbs_service_curve(&[], 200e6, 12_000.0, 1e9).unwrap();
        let behind_idle = cbs_service_curve(
            &[CbsClass {
                idle_slope_bps: 0.0,
                l_low_bits: 12_000.0,
            }],
            200e6,
            12_000.0,
            1e9,
        )
        .unwrap();
        assert_eq!(alone, behind_idle);
    }

    #[test]
    fn cbs_latency_accumulates_higher_credit() {
        let higher = [CbsClass {
            idle_slope_bps: 500e6,
            l_low_bits: 12_336.0,
        }];
        let t = cbs_latency_us(&higher, 12_336.0, 1e9);
        // hiCredit = 500e6 * 12336 / 1e9 = 6168 bits
        assert!((t - (12_336.0 + 6_168.0) / 1e9 * 1e6).abs() < 1e-12);
    }

    #[test]
    fn min_idle_slope_matches_hand_value() {
        let slope = min_idle_slope(200.0, tb(12_000.0, 10e6), 20.0).unwrap();
        let expected = 12_000.0 / (180.0 * 1e-6);
        assert!((slope - expected).abs() < 1e-6);
        assert!((expected - 66.666_666e6).abs() < 1e1);
        // the returned slope makes the delay bound exactly D
        let curve = RateLatencyCurve::new(slope, 20.0).unwrap();
        let d = delay_bound(tb(12_000.0, 10e6), curve).unwrap();
        assert!((d - 200.0).abs() / 200.0 < 1e-9);
    }

    #[test]
    fn min_idle_slope_rate_limited_case() {
        // B = 0 -> returns r
        assert_eq!(min_idle_slope(100.0, tb(0.0, 5e6), 10.0).unwrap(), 5e6);
    }

    #[test]
    fn min_idle_slope_boundary_is_infeasible() {
        match min_idle_slope(20.0, tb(1_000.0, 1e6), 20.0) {
            Err(Error::Infeasible(_)) => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn min_idle_slope_monotone_in_target() {
        let arrival = tb(40_000.0, 50e6);
        let mut last = f64::INFINITY;
        for d in [100.0, 200.0, 400.0, 800.0, 1600.0] {
            let slope = min_idle_slope(d, arrival, 12.176).unwrap();
            assert!(slope <= last, "slope must not increase with D");
            last = slope;
        }
    }

    #[test]
    fn empty_port_is_feasible_with_zero_slopes() {
        let queues = [
            QueueState {
                bound_us: 100.0,
                aggregate: TokenBucketCurve::ZERO,
                l_low_bits: 12_176.0,
            },
            QueueState {
                bound_us: 500.0,
                aggregate: TokenBucketCurve::ZERO,
                l_low_bits: 12_176.0,
            },
        ];
        assert_eq!(port_feasible(&queues, 1e9, 1.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn port_with_86_profile1_flows_is_feasible() {
        // 86 profile-1 flows: burst 86 * 512 bits, rate 86 * 2.048 Mbit/s
        let aggregate = tb(86.0 * 512.0, 86.0 * 2.048e6);
        let queues = [QueueState {
            bound_us: 250.0,
            aggregate,
            l_low_bits: L_LOW_DEFAULT_BITS,
        }];
        let slopes = port_feasible(&queues, 1e9, 1.0).unwrap();
        let expected = min_idle_slope(
            250.0,
            aggregate,
            cbs_latency_us(&[], L_LOW_DEFAULT_BITS, 1e9),
        )
        .unwrap();
        assert_eq!(slopes, vec![expected]);
        assert!(slopes[0] < 1e9);
    }

    #[test]
    fn oversubscribed_port_reports_bandwidth_cause() {
        let queues = [QueueState {
            bound_us: 4000.0,
            aggregate: tb(512.0, 2e9),
            l_low_bits: L_LOW_DEFAULT_BITS,
        }];
        let err = port_feasible(&queues, 1e9, 1.0).unwrap_err();
        assert_eq!(
            err,
            PortInfeasible {
                queue: 1,
                cause: InfeasibleCause::Bandwidth
            }
        );
    }

    #[test]
    fn unreachable_bound_reports_latency_cause() {
        let queues = [QueueState {
            bound_us: 10.0, // below the 12.176 us blocking term
            aggregate: tb(512.0, 2.048e6),
            l_low_bits: L_LOW_DEFAULT_BITS,
        }];
        let err = port_feasible(&queues, 1e9, 1.0).unwrap_err();
        assert_eq!(
            err,
            PortInfeasible {
                queue: 1,
                cause: InfeasibleCause::Latency
            }
        );
    }

    #[test]
    fn port_feasible_is_a_fixed_point() {
        let queues = [
            QueueState {
                bound_us: 250.0,
                aggregate: tb(4_096.0, 16e6),
                l_low_bits: L_LOW_DEFAULT_BITS,
            },
            QueueState {
                bound_us: 1000.0,
                aggregate: tb(16_384.0, 40e6),
                l_low_bits: L_LOW_DEFAULT_BITS,
            },
        ];
        let first = port_feasible(&queues, 1e9, 1.0).unwrap();
        let second = port_feasible(&queues, 1e9, 1.0).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn adding_traffic_never_lowers_the_slope() {
        let base = tb(4_096.0, 16e6);
        let latency = cbs_latency_us(&[], L_LOW_DEFAULT_BITS, 1e9);
        let s0 = min_idle_slope(500.0, base, latency).unwrap();
        let s1 = min_idle_slope(500.0, base + tb(512.0, 2.048e6), latency).unwrap();
        assert!(s1 >= s0);
    }
}
