use std::collections::BTreeMap;

/// Dark-run histogram from the sorted cycle indices of X photons.
///
/// A dark run is a maximal block of consecutive cycles without an X photon;
/// runs touching the start or end of the record are counted as well.
pub fn blink_runs(photon_cycles: &[u64], n_cycles: u64) -> BTreeMap<u64, u64> {
    debug_assert!(photon_cycles.windows(2).all(|w| w[0] <= w[1]));
    let mut hist = BTreeMap::new();
    let mut next_expected = 0u64;
    for &c in photon_cycles.iter().filter(|&&c| c < n_cycles) {
        if c > next_expected {
            *hist.entry(c - next_expected).or_default() += 1;
        }
        next_expected = next_expected.max(c + 1);
    }
    if n_cycles > next_expected {
        *hist.entry(n_cycles - next_expected).or_default() += 1;
    }
    hist
}
