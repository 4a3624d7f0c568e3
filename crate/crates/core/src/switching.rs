//! On/off policies, their evaluation, and the exhaustive cell-switching search.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::association::{associate_users, loads_from_association, Association, CapacityVector, FullCellRule, LinkTable};
use crate::power::{network_power, PowerProfile};
use crate::{Error, Result};

/// Active/sleep flag per base station; index 0 is the HAPS and is always on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Policy {
    beta: Vec<bool>,
}

impl Policy {
    pub fn new(beta: Vec<bool>) -> Result<Self> {
        if !beta.first().copied().unwrap_or(false) {
            return Err(Error::HapsInactive);
        }
        Ok(Self { beta })
    }

    /// Builds a policy from the small-cell flags alone.
    pub fn from_small_cells(sc_on: &[bool]) -> Self {
        let mut beta = Vec::with_capacity(sc_on.len() + 1);
        beta.push(true);
        beta.extend_from_slice(sc_on);
        Self { beta }
    }

    pub fn beta(&self) -> &[bool] {
        &self.beta
    }

    pub fn n_small_cells(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn active_small_cells(&self) -> usize {
        self.beta[1..].iter().filter(|b| **b).count()
    }

    pub fn all_small_cells_off(&self) -> bool {
        self.active_small_cells() == 0
    }
}

/// All `2^n_sc` policies in lexicographic order of the small-cell flags
/// (first small cell most significant): all-off first, all-on last.
pub fn enumerate_policies(n_sc: usize) -> Vec<Policy> {
    assert!(n_sc < usize::BITS as usize, "policy space too large");
    (0..1usize << n_sc)
        .map(|code| {
            let flags: Vec<bool> = (0..n_sc).map(|k| code & (1 << (n_sc - 1 - k)) != 0).collect();
            Policy::from_small_cells(&flags)
        })
        .collect()
}

/// The all-active baseline.
pub fn all_active_policy(n_sc: usize) -> Policy {
    Policy::from_small_cells(&vec![true; n_sc])
}

/// Everything a policy evaluation needs, frozen for one slot.
#[derive(Debug, Clone)]
pub struct SlotState {
    pub links: LinkTable,
    pub noise_mw: f64,
    /// Channels available to this network per station (C_A for the HAPS).
    pub capacity: CapacityVector,
    /// Total channels Λ_T per station, the load denominator.
    pub channels_total: Vec<usize>,
    pub sensitivity_dbm: f64,
    pub profiles: Vec<PowerProfile>,
    pub full_cell_rule: FullCellRule,
    /// Load added to the HAPS power term on top of this network's users.
    pub haps_background_load: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEvaluation {
    pub policy: Policy,
    pub feasible: bool,
    pub total_power_w: f64,
    pub unserved_count: usize,
    pub loads: Vec<f64>,
    pub association: Association,
}

/// Associates users under `policy` and prices the resulting loads.
pub fn evaluate_policy(policy: &Policy, state: &SlotState) -> Result<PolicyEvaluation> {
    let active = policy.beta();
    let association = associate_users(
        &state.links,
        active,
        state.noise_mw,
        &state.capacity,
        state.sensitivity_dbm,
        state.full_cell_rule,
    );
    association.matrix.check(&state.capacity.remaining, active)?;
    let mut loads = loads_from_association(&association.matrix, &state.channels_total)?;
    loads[0] = (loads[0] + state.haps_background_load).min(1.0);
    let total_power_w = network_power(active, &loads, &state.profiles)?;
    let unserved_count = association.unserved.len();
    Ok(PolicyEvaluation {
        policy: policy.clone(),
        feasible: unserved_count == 0,
        total_power_w,
        unserved_count,
        loads,
        association,
    })
}

/// Powers closer than this are treated as equal by the search.
///
/// Distinct loads differ by at least a fraction of a watt, so this only
/// merges values that are equal up to rounding.
pub const POWER_TIE_TOLERANCE_W: f64 = 1e-9;

fn compare_power(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= POWER_TIE_TOLERANCE_W {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Preference order used by the search; `Less` means `a` is the better choice.
///
/// Feasible beats infeasible. Among feasible candidates lower power wins;
/// among infeasible ones fewer unserved users win first. Remaining ties go
/// to fewer active small cells, then to the lexicographically smaller flag vector.
pub fn preference(a: &PolicyEvaluation, b: &PolicyEvaluation) -> Ordering {
    b.feasible
        .cmp(&a.feasible)
        .then_with(|| a.unserved_count.cmp(&b.unserved_count))
        .then_with(|| compare_power(a.total_power_w, b.total_power_w))
        .then_with(|| a.policy.active_small_cells().cmp(&b.policy.active_small_cells()))
        .then_with(|| a.policy.cmp(&b.policy))
}

/// Evaluates every policy and returns the preferred one.
///
/// When no policy serves every user the result has `feasible == false` and
/// carries the policy stranding the fewest users.
pub fn exhaustive_search(state: &SlotState) -> Result<PolicyEvaluation> {
    let n_sc = state.links.n_bs() - 1;
    let mut best: Option<PolicyEvaluation> = None;
    for policy in enumerate_policies(n_sc) {
        let eval = evaluate_policy(&policy, state)?;
        best = match best {
            Some(current) if preference(&current, &eval) != Ordering::Greater => Some(current),
            _ => Some(eval),
        };
    }
    Ok(best.expect("policy space is never empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::haps_available_capacity;
    use crate::rng::{stream, Stream};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn state(links: LinkTable, haps_cap: usize) -> SlotState {
        let n_bs = links.n_bs();
        SlotState {
            links,
            noise_mw: 4.0e-12,
            capacity: CapacityVector::new(haps_cap, 250, n_bs - 1),
            channels_total: vec![250; n_bs],
            sensitivity_dbm: -95.0,
            profiles: core::iter::once(PowerProfile::HAPS)
                .chain(core::iter::repeat(PowerProfile::SMALL_CELL).take(n_bs - 1))
                .collect(),
            full_cell_rule: FullCellRule::Cascade,
            haps_background_load: 0.0,
        }
    }

    /// HAPS link around -36 dBm, small cells scattered between -90 and -30 dBm.
    fn random_links(rng: &mut impl Rng, n_users: usize) -> LinkTable {
        let mut rx = Vec::with_capacity(n_users * 5);
        for _ in 0..n_users {
            rx.push(rng.random_range(-70.0..-34.0));
            for _ in 0..4 {
                rx.push(rng.random_range(-90.0..-30.0));
            }
        }
        LinkTable::new(5, rx)
    }

    #[test]
    fn policy_enumeration() {
        let ps = enumerate_policies(4);
        assert_eq!(ps.len(), 16);
        assert!(ps[0].all_small_cells_off());
        assert_eq!(ps[15], all_active_policy(4));
        assert!(ps.windows(2).all(|w| w[0] < w[1]));
        assert!(ps.iter().all(|p| p.beta()[0]));
        assert_eq!(enumerate_policies(0), vec![Policy::from_small_cells(&[])]);
        assert_eq!(ps[1].beta(), &[true, false, false, false, true]);
    }

    #[test]
    fn policy_requires_haps() {
        assert_eq!(Policy::new(vec![false, true]), Err(Error::HapsInactive));
        assert_eq!(all_active_policy(4).beta(), &[true; 5]);
    }

    #[test]
    fn empty_network_prefers_all_off() {
        let s = state(LinkTable::new(5, Vec::new()), 175);
        let best = exhaustive_search(&s).unwrap();
        assert!(best.feasible);
        assert!(best.policy.all_small_cells_off());
        assert_relative_eq!(best.total_power_w, 286.0, max_relative = 1e-12);
        let a3 = evaluate_policy(&all_active_policy(4), &s).unwrap();
        assert_relative_eq!(a3.total_power_w, 354.0, max_relative = 1e-12);
    }

    #[test]
    fn haps_absorbs_sparse_users() {
        let mut rng = stream(9, Stream::Shadowing);
        let links = random_links(&mut rng, 100);
        let s = state(links.clone(), haps_available_capacity(0.7, 250));
        let off = evaluate_policy(&enumerate_policies(4)[0], &s).unwrap();
        assert!(off.feasible);
        assert_eq!(off.association.matrix.column_sums()[0], 100);

        let tight = state(links, haps_available_capacity(0.2, 250));
        let off = evaluate_policy(&enumerate_policies(4)[0], &tight).unwrap();
        assert!(!off.feasible);
        assert_eq!(off.unserved_count, 50);
        let best = exhaustive_search(&tight).unwrap();
        assert!(best.feasible);
        assert!(best.policy.active_small_cells() >= 1);
    }

    #[test]
    fn single_feasible_policy_wins_regardless_of_power() {
        // one user reachable only through SC 3
        let links = LinkTable::new(5, vec![-120.0, -120.0, -120.0, -60.0, -120.0]);
        let best = exhaustive_search(&state(links, 175)).unwrap();
        assert!(best.feasible);
        assert_eq!(best.policy.beta(), &[true, false, false, true, false]);
    }

    #[test]
    fn infeasible_everywhere_returns_least_unserved() {
        let links = LinkTable::new(5, vec![-120.0; 5]);
        let best = exhaustive_search(&state(links, 175)).unwrap();
        assert!(!best.feasible);
        assert_eq!(best.unserved_count, 1);
        assert!(best.policy.all_small_cells_off());
    }

    /// Independent re-enumeration: flags built from bit patterns, loads and
    /// power recomputed directly from the column sums.
    fn brute_force_best(s: &SlotState) -> (Vec<bool>, f64) {
        let mut best: Option<(Vec<bool>, f64, usize)> = None;
        for code in 0u32..16 {
            let mut beta = vec![true; 5];
            for k in 0..4 {
                beta[k + 1] = code >> (3 - k) & 1 == 1;
            }
            let a = associate_users(&s.links, &beta, s.noise_mw, &s.capacity, s.sensitivity_dbm, s.full_cell_rule);
            if !a.unserved.is_empty() {
                continue;
            }
            let cols = a.matrix.column_sums();
            let mut p = 130.0 + 4.7 * 20.0 * cols[0] as f64 / 250.0;
            for k in 1..5 {
                p += if beta[k] { 56.0 + 2.6 * 6.3 * cols[k] as f64 / 250.0 } else { 39.0 };
            }
            let on = beta.iter().filter(|b| **b).count();
            let better = match &best {
                None => true,
                Some((bb, bp, bon)) => p < *bp - 1e-9 || ((p - bp).abs() <= 1e-9 && (on < *bon || (on == *bon && beta < *bb))),
            };
            if better {
                best = Some((beta, p, on));
            }
        }
        let (beta, p, _) = best.expect("A3 feasible in these states");
        (beta, p)
    }

    #[test]
    fn search_matches_brute_force() {
        let mut rng = stream(2024, Stream::Shadowing);
        for _ in 0..100 {
            let n_users = rng.random_range(0..=300);
            let haps_cap = rng.random_range(0..=250);
            let s = state(random_links(&mut rng, n_users), haps_cap);
            let best = exhaustive_search(&s).unwrap();
            let a3 = evaluate_policy(&all_active_policy(4), &s).unwrap();
            if !a3.feasible {
                continue;
            }
            let (beta, p) = brute_force_best(&s);
            assert_eq!(best.policy.beta(), beta.as_slice());
            assert_relative_eq!(best.total_power_w, p, max_relative = 1e-12);
            assert!(best.total_power_w <= a3.total_power_w);
        }
    }

    #[test]
    fn search_is_order_invariant() {
        let mut rng = stream(77, Stream::Shadowing);
        let s = state(random_links(&mut rng, 200), 50);
        let forward = exhaustive_search(&s).unwrap();
        let mut evals: Vec<PolicyEvaluation> =
            enumerate_policies(4).iter().rev().map(|p| evaluate_policy(p, &s).unwrap()).collect();
        evals.sort_by(preference);
        assert_eq!(evals[0], forward);
    }

    #[test]
    fn background_load_raises_haps_power() {
        let mut s = state(LinkTable::new(5, Vec::new()), 50);
        s.haps_background_load = 0.8;
        let best = exhaustive_search(&s).unwrap();
        assert_relative_eq!(best.total_power_w, 130.0 + 4.7 * 20.0 * 0.8 + 4.0 * 39.0, max_relative = 1e-12);
    }
}
