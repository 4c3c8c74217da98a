//! Built-in scene files, embedded so the suites run without any external
//! data. Names mirror `warpgeo_core::catalog`; the parsed scenes are
//! cross-checked against the programmatic constructors in tests.

pub const CATALOG: &[(&str, &str)] = &[
    (
        "flat_linear",
        "# Flat line base with f1 = x/2 over a flat plane fiber, constant f2.\n\
         [scene]\n\
         c = 1\n\
         f1 = 0.5*x0\n\
         f2 = 1\n\
         \n\
         [base]\n\
         dim = 1\n\
         g00 = 1\n\
         \n\
         [fiber]\n\
         dim = 2\n\
         g00 = 1\n\
         g11 = 1\n",
    ),
    (
        "bilinear",
        "# Flat 1-d factors, both warpings linear; admissible at c = 0.5.\n\
         [scene]\n\
         c = 0.5\n\
         f1 = x0\n\
         f2 = x0\n\
         \n\
         [base]\n\
         dim = 1\n\
         g00 = 1\n\
         \n\
         [fiber]\n\
         dim = 1\n\
         g00 = 1\n",
    ),
    (
        "degenerate",
        "# Same factors as `bilinear` at c = 1: c^2 b1 b2 = 1 exactly, so\n\
         # the cross-term matrix is singular everywhere.\n\
         [scene]\n\
         c = 1\n\
         f1 = x0\n\
         f2 = x0\n\
         suites = metric-condition\n\
         \n\
         [base]\n\
         dim = 1\n\
         g00 = 1\n\
         \n\
         [fiber]\n\
         dim = 1\n\
         g00 = 1\n",
    ),
    (
        "statistical",
        "# Statistical (non-self-dual) pairs on both factors.\n\
         [scene]\n\
         c = 0.5\n\
         f1 = x0\n\
         f2 = 1 + x0\n\
         \n\
         [base]\n\
         dim = 2\n\
         g00 = x0^2\n\
         g11 = x1^2\n\
         conn000 = 0\n\
         conn_star000 = 2/x0\n\
         conn_star111 = 2/x1\n\
         torsion_free = true\n\
         \n\
         [fiber]\n\
         dim = 1\n\
         g00 = exp(2*x0)\n\
         conn000 = 0\n\
         conn_star000 = 2\n\
         torsion_free = true\n",
    ),
    (
        "wedge",
        "# Flat factors with both warpings linear: the fiber wedge and the\n\
         # mixed curvature blocks are all nonzero.\n\
         [scene]\n\
         c = 0.5\n\
         f1 = x0\n\
         f2 = x0\n\
         \n\
         [base]\n\
         dim = 1\n\
         g00 = 1\n\
         \n\
         [fiber]\n\
         dim = 2\n\
         g00 = 1\n\
         g11 = 1\n",
    ),
    (
        "split",
        "# Curved split base (parallel gradient along x0) over a flat line.\n\
         [scene]\n\
         c = 0.5\n\
         f1 = x0\n\
         f2 = x0\n\
         \n\
         [base]\n\
         dim = 3\n\
         g00 = 1\n\
         g11 = 1\n\
         g22 = sin(x1)^2\n\
         \n\
         [fiber]\n\
         dim = 1\n\
         g00 = 1\n",
    ),
    (
        "polar_sphere",
        "# Polar base over a sphere fiber, constant f2.\n\
         [scene]\n\
         c = 0.5\n\
         f1 = x0\n\
         f2 = 1\n\
         \n\
         [base]\n\
         dim = 2\n\
         g00 = 1\n\
         g11 = x0^2\n\
         \n\
         [fiber]\n\
         dim = 2\n\
         g00 = 1\n\
         g11 = sin(x0)^2\n",
    ),
    (
        "fisher_exp",
        "# Location-scale information metric over the exponential line,\n\
         # boxed away from the sigma -> 0 and large-exponent stiffness.\n\
         [scene]\n\
         c = 0.5\n\
         f1 = x1\n\
         f2 = 1 + x0\n\
         \n\
         [base]\n\
         dim = 2\n\
         box = 1.0 2.0\n\
         g00 = 1/x1^2\n\
         g11 = 2/x1^2\n\
         \n\
         [fiber]\n\
         dim = 1\n\
         box = 0.5 1.25\n\
         g00 = exp(2*x0)\n\
         conn000 = 0\n\
         conn_star000 = 2\n\
         torsion_free = true\n",
    ),
];

/// Looks up a built-in scene by name (a trailing `.scene` is ignored, so
/// `warpgeo run flat_linear.scene` works without a file on disk).
pub fn lookup(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".scene").unwrap_or(name);
    CATALOG
        .iter()
        .find(|(n, _)| *n == stem)
        .map(|(_, text)| *text)
}
