use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use super::{ChoiceMenu, MenuOption, Scenario, ScenarioError, ScenarioKind, Slice, Wing};
use super::graph::Event;
use crate::quantum::{CMatrix, FriendDilation, PureState, QubitObservable};

/// Pauli basis for one of Lawrence's slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MerminBasis {
    X,
    Y,
}

impl MerminBasis {
    /// Angle of the corresponding observable after the frame change
    /// `V = (I − iX)/√2` applied to every qubit: `V Y V† = Z`, `V X V† = X`.
    pub fn frame_angle(&self) -> f64 {
        match self {
            MerminBasis::X => FRAC_PI_2,
            MerminBasis::Y => 0.0,
        }
    }
}

fn check_qubits(state: &PureState, expected: usize) -> Result<(), ScenarioError> {
    if state.num_qubits() == expected {
        Ok(())
    } else {
        Err(ScenarioError::WrongStateSize {
            expected,
            got: state.num_qubits(),
        })
    }
}

fn angle(a: f64) -> Result<QubitObservable, ScenarioError> {
    Ok(QubitObservable::new(a)?)
}

#[allow(clippy::too_many_arguments)]
fn wing(
    system: &str,
    memory: &str,
    friend: &str,
    friend_var: &str,
    superobserver: &str,
    super_var: &str,
    friend_angle: f64,
    options: Vec<MenuOption>,
) -> Result<Wing, ScenarioError> {
    Ok(Wing {
        friend: friend.into(),
        friend_var: friend_var.into(),
        superobserver: superobserver.into(),
        super_var: super_var.into(),
        dilation: FriendDilation::new(system, memory, angle(friend_angle)?),
        menu: ChoiceMenu::new(superobserver, options)?,
    })
}

/// Chidi measures `system` at `friend_basis`; Alice may ask him or
/// supermeasure the lab at `super_angle`.
pub fn build_wigner_friend(
    system: &PureState,
    friend_basis: f64,
    super_angle: f64,
) -> Result<Scenario, ScenarioError> {
    check_qubits(system, 1)?;
    angle(super_angle)?;
    let initial = system.relabeled(&["S"])?;
    let w = wing(
        "S",
        "M",
        "Chidi",
        "C",
        "Alice",
        "A",
        friend_basis,
        vec![MenuOption::Ask, MenuOption::Super(super_angle)],
    )?;
    Scenario::assemble(ScenarioKind::Wigner, initial, vec![w], "Alice", Vec::new())
}

fn two_wings(
    pair: &PureState,
    angles: [f64; 4],
    left_options: Vec<MenuOption>,
    right_options: Vec<MenuOption>,
) -> Result<(PureState, Vec<Wing>), ScenarioError> {
    check_qubits(pair, 2)?;
    let [c, d, _, _] = angles;
    let initial = pair.relabeled(&["S_C", "S_D"])?;
    let left = wing("S_C", "M_C", "Chidi", "C", "Alice", "A", c, left_options)?;
    let right = wing("S_D", "M_D", "Divya", "D", "Bob", "B", d, right_options)?;
    Ok((initial, vec![left, right]))
}

/// Two sealed labs sharing `pair`. Chidi measures at `c_angle`, Divya at
/// `d_angle`; Alice and Bob may ask or supermeasure at `a_angle`, `b_angle`.
pub fn build_bong(
    pair: &PureState,
    c_angle: f64,
    d_angle: f64,
    a_angle: f64,
    b_angle: f64,
) -> Result<Scenario, ScenarioError> {
    angle(a_angle)?;
    angle(b_angle)?;
    let (initial, wings) = two_wings(
        pair,
        [c_angle, d_angle, a_angle, b_angle],
        vec![MenuOption::Ask, MenuOption::Super(a_angle)],
        vec![MenuOption::Ask, MenuOption::Super(b_angle)],
    )?;
    Scenario::assemble(ScenarioKind::Bong, initial, wings, "Alice", Vec::new())
}

/// Same labs as [`build_bong`] without the Ask option, plus the four named
/// spacelike slices.
pub fn build_ormrod_barrett(
    pair: &PureState,
    c_angle: f64,
    d_angle: f64,
    a_angle: f64,
    b_angle: f64,
) -> Result<Scenario, ScenarioError> {
    angle(a_angle)?;
    angle(b_angle)?;
    let (initial, wings) = two_wings(
        pair,
        [c_angle, d_angle, a_angle, b_angle],
        vec![MenuOption::Super(a_angle)],
        vec![MenuOption::Super(b_angle)],
    )?;
    let slice = |name: &str, events: [Event; 2]| Slice {
        name: name.into(),
        events: events.to_vec(),
    };
    let slices = vec![
        slice("Alice+Bob", [Event::SuperMeasurement(0), Event::SuperMeasurement(1)]),
        slice("Chidi+Divya", [Event::FriendMeasurement(0), Event::FriendMeasurement(1)]),
        slice("Alice+Divya", [Event::SuperMeasurement(0), Event::FriendMeasurement(1)]),
        slice("Bob+Chidi", [Event::SuperMeasurement(1), Event::FriendMeasurement(0)]),
    ];
    Scenario::assemble(ScenarioKind::OrmrodBarrett, initial, wings, "Alice", slices)
}

/// `(|000⟩ + |111⟩)/√2` with `V = (I − iX)/√2` applied to every qubit, so
/// that `X` and `Y` questions become observables at `π/2` and `0`.
fn framed_ghz(labels: &[&str]) -> PureState {
    let ghz = PureState::ghz(labels);
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let t = Complex64::new(0.0, -FRAC_1_SQRT_2);
    let v = CMatrix::from_row_slice(2, 2, &[s, t, t, s]);
    (0..labels.len()).fold(ghz, |acc, q| {
        let amps = acc.apply_local(&[q], &v);
        acc.with_amplitudes(amps)
    })
}

/// GHZ state over three slots. Alice is the friend in every slot and
/// measures qubit `i` in `a_bases[i]`; Bob supermeasures slot `i` (qubit `i`
/// together with Alice's memory `i`) in `b_bases[i]`.
pub fn build_lawrence(
    a_bases: [MerminBasis; 3],
    b_bases: [MerminBasis; 3],
) -> Result<Scenario, ScenarioError> {
    let labels = ["q1", "q2", "q3"];
    let initial = framed_ghz(&labels);
    let wings = (0..3)
        .map(|i| {
            wing(
                labels[i],
                &format!("M{}", i + 1),
                "Alice",
                &format!("A{}", i + 1),
                "Bob",
                &format!("B{}", i + 1),
                a_bases[i].frame_angle(),
                vec![MenuOption::Ask, MenuOption::Super(b_bases[i].frame_angle())],
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Scenario::assemble(ScenarioKind::Lawrence, initial, wings, "Bob", Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::OptionKind;
    use std::collections::BTreeSet;
    use std::f64::consts::FRAC_PI_4;

    fn set(vars: &[&str]) -> BTreeSet<String> {
        vars.iter().map(|s| s.to_string()).collect()
    }

    fn bong() -> Scenario {
        build_bong(
            &PureState::singlet("x", "y"),
            0.0,
            FRAC_PI_4,
            FRAC_PI_2,
            3.0 * FRAC_PI_4,
        )
        .unwrap()
    }

    #[test]
    fn bong_accessible_pairs() {
        use OptionKind::*;
        let s = bong();
        assert_eq!(s.contexts().len(), 4);
        for (kinds, expect) in [
            ([Ask, Ask], ["C", "D"]),
            ([Ask, Super], ["C", "B"]),
            ([Super, Ask], ["A", "D"]),
            ([Super, Super], ["A", "B"]),
        ] {
            let ctx = s.context_by_kinds(&kinds).unwrap();
            assert_eq!(s.accessible_variables("Alice", ctx), set(&expect));
            assert_eq!(s.context_variables(ctx), expect.to_vec());
        }
    }

    #[test]
    fn friends_only_see_their_own_record() {
        let s = bong();
        for ctx in s.contexts() {
            assert_eq!(s.accessible_variables("Chidi", ctx), set(&["C"]));
        }
    }

    #[test]
    fn lawrence_has_eight_contexts() {
        use MerminBasis::*;
        let s = build_lawrence([Y; 3], [X; 3]).unwrap();
        assert_eq!(s.contexts().len(), 8);
        let ctx = s
            .context_by_kinds(&[OptionKind::Super, OptionKind::Ask, OptionKind::Ask])
            .unwrap();
        assert_eq!(s.accessible_variables("Bob", ctx), set(&["B1", "A2", "A3"]));
        assert_eq!(s.parties().len(), 2);
    }

    #[test]
    fn framed_ghz_is_normalized() {
        let s = framed_ghz(&["a", "b", "c"]);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ormrod_barrett_slices_are_spacelike() {
        let s = build_ormrod_barrett(&PureState::singlet("x", "y"), 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(s.contexts().len(), 1);
        assert_eq!(s.slices().len(), 4);
        assert!(s.slice("Alice+Divya").is_ok());
        assert!(matches!(s.slice("nope"), Err(ScenarioError::UnknownSlice(_))));
    }

    #[test]
    fn state_size_is_checked() {
        assert!(matches!(
            build_bong(&PureState::plus("x"), 0.0, 0.0, 0.0, 0.0),
            Err(ScenarioError::WrongStateSize { expected: 2, got: 1 })
        ));
        assert!(build_wigner_friend(&PureState::singlet("a", "b"), 0.0, 0.0).is_err());
    }

    #[test]
    fn menu_rules() {
        assert!(ChoiceMenu::new("Alice", vec![]).is_err());
        assert!(ChoiceMenu::new("Alice", vec![MenuOption::Ask, MenuOption::Ask]).is_err());
    }

    #[test]
    fn leak_makes_a_path_from_outcome_to_choice() {
        let s = bong()
            .with_leak(Event::FriendMeasurement(1), Event::Choice(0))
            .unwrap();
        assert!(s.graph().precedes(Event::FriendMeasurement(1), Event::Choice(0)));
        assert!(s.graph().is_acyclic());
    }
}
