use std::collections::BTreeMap;

use super::{Class, Domain, Endpoint, Shift, Superpotential};
use crate::expr::{parse, Inequality};

/// Domain endpoint: expression and whether the potential is singular there.
type Bound<'a> = Option<(&'a str, bool)>;

struct Spec<'a> {
    id: &'a str,
    name: &'a str,
    w: &'a str,
    var: &'a str,
    domain: (Bound<'a>, Bound<'a>),
    constraints: &'a [&'a str],
    shift: (&'a str, i8),
    g: &'a str,
    energy: &'a str,
    class: Class,
    defaults: &'a [(&'a str, f64)],
    ranges: &'a [(&'a str, f64, f64)],
}

fn endpoint(e: Bound) -> Endpoint {
    match e {
        None => Endpoint::Infinite,
        Some((at, true)) => Endpoint::Singular { at: parse(at).expect("endpoint") },
        Some((at, false)) => Endpoint::Finite { at: parse(at).expect("endpoint") },
    }
}

fn build(s: Spec<'_>) -> Superpotential {
    Superpotential {
        id: s.id.into(),
        name: s.name.into(),
        w: parse(s.w).expect(s.id),
        variable: s.var.into(),
        domain: Domain { lo: endpoint(s.domain.0), hi: endpoint(s.domain.1) },
        constraints: s.constraints.iter().map(|c| Inequality::parse(c).expect(s.id)).collect(),
        shift: Shift { param: s.shift.0.into(), sign: s.shift.1, offset: 0.0 },
        g: parse(s.g).expect(s.id),
        energy: parse(s.energy).expect(s.id),
        class: s.class,
        defaults: s.defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
        ranges: s.ranges.iter().map(|(k, lo, hi)| (k.to_string(), (*lo, *hi))).collect(),
    }
}

const REAL_LINE: (Bound, Bound) = (None, None);
const HALF_LINE: (Bound, Bound) = (Some(("0", true)), None);

pub(super) fn builtin() -> Vec<Superpotential> {
    use Class::*;
    [
        Spec {
            id: "scarf-hyp",
            name: "Scarf II (hyperbolic)",
            w: "A*tanh(x) + B*sech(x)",
            var: "x",
            domain: REAL_LINE,
            constraints: &["A > 0"],
            shift: ("A", -1),
            g: "-a^2",
            energy: "A^2 - (A - n*hbar)^2",
            class: TypeI,
            defaults: &[("A", 3.0), ("B", 1.0)],
            ranges: &[("A", 0.5, 4.0), ("B", -2.0, 2.0)],
        },
        Spec {
            id: "gen-poschl-teller",
            name: "Generalized Pöschl-Teller",
            w: "A*coth(r) - B*csch(r)",
            var: "r",
            domain: HALF_LINE,
            constraints: &["A > 0", "B > A"],
            shift: ("A", -1),
            g: "-a^2",
            energy: "A^2 - (A - n*hbar)^2",
            class: TypeI,
            defaults: &[("A", 2.0), ("B", 4.0)],
            ranges: &[("A", 0.5, 3.0), ("B", 0.5, 6.0)],
        },
        Spec {
            id: "scarf-trig",
            name: "Scarf I (trigonometric)",
            w: "A*tan(x) - B*sec(x)",
            var: "x",
            domain: (Some(("-pi/2", true)), Some(("pi/2", true))),
            constraints: &["A > B", "A + B > 0"],
            shift: ("A", 1),
            g: "a^2",
            energy: "(A + n*hbar)^2 - A^2",
            class: TypeI,
            defaults: &[("A", 3.0), ("B", 1.0)],
            ranges: &[("A", 0.5, 4.0), ("B", -2.0, 2.0)],
        },
        Spec {
            id: "rosen-morse-1",
            name: "Rosen-Morse I (trigonometric)",
            w: "-A*cot(x) - B/A",
            var: "x",
            domain: (Some(("0", true)), Some(("pi", true))),
            constraints: &["A > 0"],
            shift: ("A", 1),
            g: "a^2 - B^2/a^2",
            energy: "(A + n*hbar)^2 - A^2 + B^2/A^2 - B^2/(A + n*hbar)^2",
            class: TypeI,
            defaults: &[("A", 2.0), ("B", 1.0)],
            ranges: &[("A", 0.5, 4.0), ("B", -3.0, 3.0)],
        },
        Spec {
            id: "rosen-morse-2",
            name: "Rosen-Morse II (hyperbolic)",
            w: "A*tanh(x) + B/A",
            var: "x",
            domain: REAL_LINE,
            constraints: &["A > 0", "B < A^2", "B > -A^2"],
            shift: ("A", -1),
            g: "-a^2 - B^2/a^2",
            energy: "A^2 - (A - n*hbar)^2 - B^2/(A - n*hbar)^2 + B^2/A^2",
            class: TypeI,
            defaults: &[("A", 3.0), ("B", 2.0)],
            ranges: &[("A", 0.5, 4.0), ("B", -3.0, 3.0)],
        },
        Spec {
            id: "eckart",
            name: "Eckart",
            w: "-A*coth(r) + B/A",
            var: "r",
            domain: HALF_LINE,
            constraints: &["A > 0", "B > A^2"],
            shift: ("A", 1),
            g: "-a^2 - B^2/a^2",
            energy: "A^2 - (A + n*hbar)^2 + B^2/A^2 - B^2/(A + n*hbar)^2",
            class: TypeI,
            defaults: &[("A", 2.0), ("B", 10.0)],
            ranges: &[("A", 0.5, 3.0), ("B", 0.5, 12.0)],
        },
        Spec {
            id: "morse",
            name: "Morse",
            w: "A - B*exp(-x)",
            var: "x",
            domain: REAL_LINE,
            constraints: &["A > 0", "B > 0"],
            shift: ("A", -1),
            g: "-a^2",
            energy: "A^2 - (A - n*hbar)^2",
            class: TypeII,
            defaults: &[("A", 5.0), ("B", 1.0)],
            ranges: &[("A", 0.5, 6.0), ("B", 0.2, 3.0)],
        },
        Spec {
            id: "osc-3d",
            name: "3-D oscillator",
            w: "1/2*omega*r - l/r",
            var: "r",
            domain: HALF_LINE,
            constraints: &["omega > 0", "l > 0"],
            shift: ("l", 1),
            g: "2*omega*a",
            energy: "2*n*omega*hbar",
            class: TypeII,
            defaults: &[("omega", 1.0), ("l", 1.0)],
            ranges: &[("omega", 0.2, 3.0), ("l", 0.2, 3.0)],
        },
        Spec {
            id: "coulomb",
            name: "Coulomb",
            w: "e2/(2*l) - l/r",
            var: "r",
            domain: HALF_LINE,
            constraints: &["e2 > 0", "l > 0"],
            shift: ("l", 1),
            g: "-e2^2/(4*a^2)",
            energy: "e2^2/4*(1/l^2 - 1/(l + n*hbar)^2)",
            class: TypeII,
            defaults: &[("e2", 2.0), ("l", 1.0)],
            ranges: &[("e2", 0.2, 3.0), ("l", 0.2, 3.0)],
        },
        Spec {
            id: "harmonic-oscillator",
            name: "1-D harmonic oscillator",
            w: "1/2*omega*x",
            var: "x",
            domain: REAL_LINE,
            constraints: &["omega > 0"],
            shift: ("a", 1),
            g: "omega*a",
            energy: "n*omega*hbar",
            class: TypeII,
            defaults: &[("omega", 2.0), ("a", 0.0)],
            ranges: &[("omega", 0.2, 3.0), ("a", -2.0, 2.0)],
        },
        Spec {
            id: "quesne-3d-osc",
            name: "Extended 3-D oscillator",
            w: "1/2*omega*r - l/r + 2*omega*r*hbar/(omega*r^2 + 2*l - hbar) \
                - 2*omega*r*hbar/(omega*r^2 + 2*l + hbar)",
            var: "r",
            domain: HALF_LINE,
            constraints: &["omega > 0", "2*l > hbar"],
            shift: ("l", 1),
            g: "2*omega*a",
            energy: "2*n*omega*hbar",
            class: Extended,
            defaults: &[("omega", 1.0), ("l", 2.0)],
            ranges: &[("omega", 0.2, 3.0), ("l", 0.2, 3.0), ("hbar", 0.25, 2.0)],
        },
        Spec {
            id: "morse-restricted-ext",
            name: "Extended Morse",
            w: "-a - exp(-x) + hbar^2*(2*P*exp(x) + 2*a*Q + Q*exp(-x))/(exp(2*x) + Q*hbar^2)",
            var: "x",
            domain: REAL_LINE,
            constraints: &["a < 0", "Q > 0"],
            shift: ("a", 1),
            g: "-a^2",
            energy: "a^2 - (a + n*hbar)^2",
            class: Extended,
            defaults: &[("a", -5.0), ("P", 1.0), ("Q", 1.0)],
            ranges: &[("a", -6.0, -0.5), ("P", -2.0, 2.0), ("Q", 0.2, 3.0), ("hbar", 0.25, 2.0)],
        },
    ]
    .into_iter()
    .map(build)
    .collect()
}
