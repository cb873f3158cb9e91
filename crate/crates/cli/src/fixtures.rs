//! Example documents compiled into the binary, one per file under
//! `fixtures/`. Each carries a `description` and, when it is not 0, its
//! `expected_exit`.

use serde_json::Value;

pub struct Fixture {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! fixture {
    ($name:literal) => {
        Fixture { name: $name, text: include_str!(concat!("../fixtures/", $name, ".json")) }
    };
}

pub const FIXTURES: &[Fixture] = &[
    fixture!("heis3_validate"),
    fixture!("bad_shapes_validate"),
    fixture!("sl2_cohomology"),
    fixture!("heis3_cohomology"),
    fixture!("plane_extend"),
    fixture!("so3_extend_not_cocycle"),
    fixture!("sl2_equivalence"),
    fixture!("plane_equivalence"),
    fixture!("plane_d2"),
    fixture!("torus_d2_recovery"),
    fixture!("torus_gamma"),
    fixture!("torus_half_integrability"),
    fixture!("torus_half_integrability_half_lattice"),
    fixture!("torus_unit_integrability"),
    fixture!("torus_near_integer_indeterminate"),
    fixture!("torus3_integrability"),
    fixture!("su2_integrability"),
    fixture!("u1_su2_integrability"),
    fixture!("torus_pi1"),
];

impl Fixture {
    fn field(&self) -> Value {
        serde_json::from_str(self.text).unwrap_or(Value::Null)
    }

    pub fn description(&self) -> String {
        self.field()["description"].as_str().unwrap_or("").to_string()
    }

    pub fn task(&self) -> String {
        self.field()["task"].as_str().unwrap_or("?").to_string()
    }

    pub fn expected_exit(&self) -> i32 {
        self.field()["expected_exit"].as_i64().unwrap_or(0) as i32
    }
}

pub fn find(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

/// One line per fixture: name, task, expected exit status, description.
pub fn listing() -> String {
    let width = FIXTURES.iter().map(|f| f.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for f in FIXTURES {
        out.push_str(&format!(
            "{:<width$}  {:<19}  exit {}  {}\n",
            f.name,
            f.task(),
            f.expected_exit(),
            f.description()
        ));
    }
    out
}
