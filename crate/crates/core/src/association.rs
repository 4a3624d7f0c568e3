//! Greedy SINR-ranked user association under sensitivity and capacity limits.

use alloc::vec;
use alloc::vec::Vec;

use crate::radio::sinr_linear;
use crate::{db_to_linear, Error, Result};

/// Received powers for every (user, base station) pair of one slot.
///
/// Row-major, `n_bs` columns; column 0 is the HAPS.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTable {
    n_bs: usize,
    rx_dbm: Vec<f64>,
    rx_mw: Vec<f64>,
}

impl LinkTable {
    pub fn new(n_bs: usize, rx_dbm: Vec<f64>) -> Self {
        assert!(n_bs > 0 && rx_dbm.len() % n_bs == 0, "link table shape");
        let rx_mw = rx_dbm.iter().map(|p| db_to_linear(*p)).collect();
        Self { n_bs, rx_dbm, rx_mw }
    }

    pub fn n_users(&self) -> usize {
        self.rx_dbm.len() / self.n_bs
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn rx_dbm(&self, user: usize, bs: usize) -> f64 {
        self.rx_dbm[user * self.n_bs + bs]
    }

    pub fn row_dbm(&self, user: usize) -> &[f64] {
        &self.rx_dbm[user * self.n_bs..(user + 1) * self.n_bs]
    }

    /// Sum of linear received power from every active station.
    pub fn total_active_mw(&self, user: usize, active: &[bool]) -> f64 {
        let row = &self.rx_mw[user * self.n_bs..(user + 1) * self.n_bs];
        row.iter().zip(active).filter(|(_, on)| **on).map(|(p, _)| *p).sum()
    }

    /// Linear SINR of `user` on `bs` given the active set.
    pub fn sinr(&self, user: usize, bs: usize, active: &[bool], noise_mw: f64) -> f64 {
        sinr_linear(self.rx_mw[user * self.n_bs + bs], self.total_active_mw(user, active), noise_mw)
    }
}

/// What to do when a user's best station has no free channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FullCellRule {
    /// Fall back to the next-best qualifying station.
    #[default]
    Cascade,
    /// Only the best qualifying station is considered; the user is dropped if it is full.
    Outage,
}

/// Remaining user channels per base station.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityVector {
    pub remaining: Vec<usize>,
}

impl CapacityVector {
    /// HAPS gets `haps` channels, each of the `n_sc` small cells gets `per_sc`.
    pub fn new(haps: usize, per_sc: usize, n_sc: usize) -> Self {
        let mut remaining = vec![per_sc; n_sc + 1];
        remaining[0] = haps;
        Self { remaining }
    }
}

/// Binary user × station assignment, stored as one optional column per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationMatrix {
    n_bs: usize,
    serving: Vec<Option<usize>>,
}

impl AssociationMatrix {
    pub fn empty(n_users: usize, n_bs: usize) -> Self {
        Self { n_bs, serving: vec![None; n_users] }
    }

    pub fn n_users(&self) -> usize {
        self.serving.len()
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn serving(&self, user: usize) -> Option<usize> {
        self.serving[user]
    }

    pub fn entry(&self, user: usize, bs: usize) -> bool {
        self.serving[user] == Some(bs)
    }

    pub fn assign(&mut self, user: usize, bs: usize) {
        assert!(bs < self.n_bs);
        self.serving[user] = Some(bs);
    }

    /// Users per station (column sums).
    pub fn column_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.n_bs];
        for bs in self.serving.iter().flatten() {
            sums[*bs] += 1;
        }
        sums
    }

    pub fn served_count(&self) -> usize {
        self.serving.iter().filter(|s| s.is_some()).count()
    }

    /// Checks capacity and active-set consistency of every column.
    pub fn check(&self, capacity: &[usize], active: &[bool]) -> Result<()> {
        for (bs, users) in self.column_sums().into_iter().enumerate() {
            if users > capacity[bs] {
                return Err(Error::ColumnOverCapacity { bs, users, capacity: capacity[bs] });
            }
            if users > 0 && !active[bs] {
                return Err(Error::LoadOnInactive(bs));
            }
        }
        Ok(())
    }
}

/// Result of one association pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    pub matrix: AssociationMatrix,
    /// Users with no qualifying station, ascending.
    pub unserved: Vec<usize>,
    /// Linear SINR on the serving link, `None` for unserved users.
    pub sinr: Vec<Option<f64>>,
}

/// Associates users in ascending id order.
///
/// A station qualifies for a user when it is active, its received power
/// reaches `sensitivity_dbm` and it still has a free channel. Candidates are
/// ranked by SINR, ties going to the lower station index.
pub fn associate_users(
    links: &LinkTable,
    active: &[bool],
    noise_mw: f64,
    caps: &CapacityVector,
    sensitivity_dbm: f64,
    rule: FullCellRule,
) -> Association {
    let n_users = links.n_users();
    let n_bs = links.n_bs();
    let mut remaining = caps.remaining.clone();
    let mut matrix = AssociationMatrix::empty(n_users, n_bs);
    let mut unserved = Vec::new();
    let mut sinrs = vec![None; n_users];
    let mut ranked: Vec<(usize, f64)> = Vec::with_capacity(n_bs);

    for user in 0..n_users {
        let total = links.total_active_mw(user, active);
        ranked.clear();
        ranked.extend((0..n_bs).filter(|&bs| active[bs] && links.rx_dbm(user, bs) >= sensitivity_dbm).map(|bs| {
            (bs, sinr_linear(links.rx_mw[user * n_bs + bs], total, noise_mw))
        }));
        // stable sort keeps the lower index first on equal SINR
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));

        let choice = match rule {
            FullCellRule::Cascade => ranked.iter().find(|(bs, _)| remaining[*bs] > 0),
            FullCellRule::Outage => ranked.first().filter(|(bs, _)| remaining[*bs] > 0),
        };
        match choice {
            Some(&(bs, s)) => {
                remaining[bs] -= 1;
                matrix.assign(user, bs);
                sinrs[user] = Some(s);
            }
            None => unserved.push(user),
        }
    }
    Association { matrix, unserved, sinr: sinrs }
}

/// Per-station load `ρ_k = users_k / Λ_T,k`.
pub fn loads_from_association(a: &AssociationMatrix, caps_total: &[usize]) -> Result<Vec<f64>> {
    a.column_sums()
        .into_iter()
        .enumerate()
        .map(|(bs, users)| {
            let capacity = caps_total[bs];
            if users > capacity {
                Err(Error::ColumnOverCapacity { bs, users, capacity })
            } else if users == 0 {
                Ok(0.0)
            } else {
                Ok(users as f64 / capacity as f64)
            }
        })
        .collect()
}

/// Channels of the HAPS left to this network: `floor(λ · C_T)`.
pub fn haps_available_capacity(lambda: f64, c_total: usize) -> usize {
    // absorbs representation error such as 0.7 * 250 = 174.999...
    libm::floor(lambda * c_total as f64 + 1e-9) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use proptest::prelude::*;
    use rand::Rng;

    const NOISE_MW: f64 = 4.0e-12;

    #[test]
    fn single_user_single_bs() {
        let links = LinkTable::new(1, vec![-60.0]);
        let a = associate_users(&links, &[true], NOISE_MW, &CapacityVector::new(1, 0, 0), -95.0, FullCellRule::Cascade);
        assert!(a.matrix.entry(0, 0));
        assert!(a.unserved.is_empty());
    }

    #[test]
    fn full_best_cell_falls_back_to_second_best() {
        // user 0 fills BS 1; user 1 prefers BS 1 but must take BS 0
        let links = LinkTable::new(2, vec![-70.0, -50.0, -70.0, -50.0]);
        let caps = CapacityVector::new(5, 1, 1);
        let a = associate_users(&links, &[true, true], NOISE_MW, &caps, -95.0, FullCellRule::Cascade);
        assert_eq!(a.matrix.serving(0), Some(1));
        assert_eq!(a.matrix.serving(1), Some(0));

        let b = associate_users(&links, &[true, true], NOISE_MW, &caps, -95.0, FullCellRule::Outage);
        assert_eq!(b.matrix.serving(1), None);
        assert_eq!(b.unserved, vec![1]);
    }

    #[test]
    fn below_sensitivity_is_unserved() {
        let links = LinkTable::new(3, vec![-96.0, -100.0, -120.0]);
        let a = associate_users(&links, &[true; 3], NOISE_MW, &CapacityVector::new(10, 10, 2), -95.0, FullCellRule::Cascade);
        assert_eq!(a.unserved, vec![0]);
        assert_eq!(a.sinr, vec![None]);
    }

    #[test]
    fn inactive_station_is_skipped() {
        let links = LinkTable::new(2, vec![-70.0, -40.0]);
        let a = associate_users(&links, &[true, false], NOISE_MW, &CapacityVector::new(1, 1, 1), -95.0, FullCellRule::Cascade);
        assert_eq!(a.matrix.serving(0), Some(0));
    }

    #[test]
    fn equal_sinr_goes_to_lower_index() {
        let links = LinkTable::new(3, vec![-60.0, -50.0, -50.0]);
        let a = associate_users(&links, &[true; 3], NOISE_MW, &CapacityVector::new(1, 1, 2), -95.0, FullCellRule::Cascade);
        assert_eq!(a.matrix.serving(0), Some(1));
    }

    #[test]
    fn load_cases() {
        let m = AssociationMatrix::empty(3, 5);
        assert_eq!(loads_from_association(&m, &[250; 5]).unwrap(), vec![0.0; 5]);

        let mut m = AssociationMatrix::empty(250, 5);
        for u in 0..125 {
            m.assign(u, 0);
        }
        assert_eq!(loads_from_association(&m, &[250; 5]).unwrap()[0], 0.5);
        for u in 0..250 {
            m.assign(u, 2);
        }
        assert_eq!(loads_from_association(&m, &[250; 5]).unwrap()[2], 1.0);
        assert_eq!(
            loads_from_association(&m, &[250, 250, 100, 250, 250]),
            Err(Error::ColumnOverCapacity { bs: 2, users: 250, capacity: 100 })
        );
    }

    #[test]
    fn available_capacity_cases() {
        assert_eq!(haps_available_capacity(0.2, 250), 50);
        assert_eq!(haps_available_capacity(0.7, 250), 175);
        assert_eq!(haps_available_capacity(0.5, 250), 125);
        assert_eq!(haps_available_capacity(1.0, 250), 250);
        assert_eq!(haps_available_capacity(0.0, 250), 0);
    }

    fn random_links(seed: u64, n_users: usize, n_bs: usize) -> LinkTable {
        let mut rng = stream(seed, Stream::Shadowing);
        LinkTable::new(n_bs, (0..n_users * n_bs).map(|_| rng.random_range(-110.0..-30.0)).collect())
    }

    fn argmax_sinr(links: &LinkTable, user: usize, active: &[bool]) -> usize {
        let mut best = None::<(usize, f64)>;
        for bs in 0..links.n_bs() {
            if !active[bs] {
                continue;
            }
            let s = links.sinr(user, bs, active, NOISE_MW);
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((bs, s));
            }
        }
        best.unwrap().0
    }

    proptest! {
        #[test]
        fn invariants_hold(seed in any::<u64>(), n_users in 0usize..120, haps_cap in 0usize..60, sc_cap in 0usize..40, mask in 0u32..16) {
            let links = random_links(seed, n_users, 5);
            let mut active = [true; 5];
            for k in 0..4 {
                active[k + 1] = mask & (1 << k) != 0;
            }
            let caps = CapacityVector::new(haps_cap, sc_cap, 4);
            let a = associate_users(&links, &active, NOISE_MW, &caps, -95.0, FullCellRule::Cascade);
            prop_assert!(a.matrix.check(&caps.remaining, &active).is_ok());
            prop_assert_eq!(a.matrix.served_count() + a.unserved.len(), n_users);
            for u in 0..n_users {
                if let Some(bs) = a.matrix.serving(u) {
                    prop_assert!(links.rx_dbm(u, bs) >= -95.0);
                }
            }
        }

        #[test]
        fn unbounded_capacity_serves_argmax(seed in any::<u64>(), n_users in 1usize..80, mask in 0u32..16) {
            let links = random_links(seed, n_users, 5);
            let mut active = [true; 5];
            for k in 0..4 {
                active[k + 1] = mask & (1 << k) != 0;
            }
            let caps = CapacityVector::new(usize::MAX, usize::MAX, 4);
            let a = associate_users(&links, &active, NOISE_MW, &caps, f64::NEG_INFINITY, FullCellRule::Cascade);
            prop_assert!(a.unserved.is_empty());
            for u in 0..n_users {
                prop_assert_eq!(a.matrix.serving(u), Some(argmax_sinr(&links, u, &active)));
            }

            // permuting user order changes nothing without contention
            let perm: Vec<usize> = (0..n_users).rev().collect();
            let rows: Vec<f64> = perm.iter().flat_map(|&u| links.row_dbm(u).to_vec()).collect();
            let b = associate_users(&LinkTable::new(5, rows), &active, NOISE_MW, &caps, f64::NEG_INFINITY, FullCellRule::Cascade);
            for (new_id, &old_id) in perm.iter().enumerate() {
                prop_assert_eq!(b.matrix.serving(new_id), a.matrix.serving(old_id));
            }
        }

        #[test]
        fn adding_a_station_never_strands_more_users(
            seed in any::<u64>(),
            n_users in 0usize..150,
            haps_cap in 0usize..60,
            sc_cap in 0usize..40,
            mask in 0u32..16,
            extra in 0usize..4,
        ) {
            let links = random_links(seed, n_users, 5);
            let mut active = [true; 5];
            for k in 0..4 {
                active[k + 1] = mask & (1 << k) != 0;
            }
            prop_assume!(!active[extra + 1]);
            let caps = CapacityVector::new(haps_cap, sc_cap, 4);
            let before = associate_users(&links, &active, NOISE_MW, &caps, -95.0, FullCellRule::Cascade);
            active[extra + 1] = true;
            let after = associate_users(&links, &active, NOISE_MW, &caps, -95.0, FullCellRule::Cascade);
            prop_assert!(after.unserved.len() <= before.unserved.len());
        }
    }
}
