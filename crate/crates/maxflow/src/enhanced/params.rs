//! Derived parameters for the enhanced solver.
//!
//! For scale factor `k = 2^kappa`:
//!   Q        least integer with k^Q >= 4n
//!   eps      k^-Q            (violation threshold eps * delta)
//!   M        k^2Q = eps^-2   (abundance threshold M * delta)
//!   S        2 k^(2Q+2)      (capacity pre-scale, an exact power of two)
//!
//! Q >= 2 is required: a forest pull delivers delta/k, which de-violates a
//! node only when delta/k >= 2 eps delta, i.e. k^(Q-1) >= 2. Hence k >= 4n
//! (which forces Q = 1) is rejected.

#[derive(Clone, Copy, Debug)]
pub struct Params {
    pub k: u64,
    pub kappa: u32,
    pub q: u32,
    /// eps = 2^eps_exp
    pub eps_exp: i32,
    /// M = 2^m_exp
    pub m_exp: i32,
    /// capacity scale S = 2^sigma
    pub sigma: u32,
}

pub fn derive_params(k: u64, n: usize) -> Result<Params, String> {
    if !(k >= 4 && k.is_power_of_two()) {
        return Err(format!("k must be a power of two >= 4, got {k}"));
    }
    if k as u128 >= 4 * n as u128 {
        return Err(format!(
            "k = {k} must be below 4n = {} so pulls can de-violate nodes",
            4 * n
        ));
    }
    let kappa = k.trailing_zeros();
    let lg4n = (4 * n as u128).next_power_of_two().trailing_zeros();
    let q = lg4n.div_ceil(kappa);
    debug_assert!(q >= 2);
    Ok(Params {
        k,
        kappa,
        q,
        eps_exp: -((kappa * q) as i32),
        m_exp: (2 * kappa * q) as i32,
        sigma: 1 + kappa * (2 * q + 2),
    })
}

/// Least power of two at or above `max(log2 log2 n, m/n, 4)`.
pub fn default_k(n: usize, input_arcs: usize) -> u64 {
    let lg = (n.max(2) as f64).log2().log2().max(0.0);
    let density = input_arcs as f64 / n.max(1) as f64;
    let target = lg.max(density).max(4.0).ceil() as u64;
    target.next_power_of_two()
}

#[cfg(test)]
mod test {
    use super::*;

    #[test]
    fn small_network_params() {
        let p = derive_params(4, 8).unwrap();
        // k^Q >= 32 needs Q = 3 at k = 4.
        assert_eq!(p.q, 3);
        assert_eq!(p.eps_exp, -6);
        assert_eq!(p.m_exp, 12);
        assert_eq!(p.sigma, 1 + 2 * 8);
    }

    #[test]
    fn q_always_at_least_two() {
        for n in 2..200 {
            for k in [4u64, 8, 16, 32] {
                if let Ok(p) = derive_params(k, n) {
                    assert!(p.q >= 2, "n={n} k={k}");
                    assert!((k as u128).pow(p.q) >= 4 * n as u128);
                    assert!((k as u128).pow(p.q - 1) < 4 * n as u128);
                }
            }
        }
    }

    #[test]
    fn oversized_k_rejected() {
        assert!(derive_params(16, 4).is_err());
        assert!(derive_params(16, 5).is_ok());
        assert!(derive_params(6, 100).is_err());
        assert!(derive_params(2, 100).is_err());
    }

    #[test]
    fn default_k_floors_at_four() {
        assert_eq!(default_k(10, 20), 4);
        assert_eq!(default_k(1000, 9000), 16);
    }
}
