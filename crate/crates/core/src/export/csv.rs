use super::{ExportBundle, ExportError};

/// Header of axis names, then one row per distinct achieved point in user
/// orientation.
pub fn emit_csv(bundle: &ExportBundle) -> Result<String, ExportError> {
    bundle.check()?;
    let mut w = ::csv::WriterBuilder::new().terminator(::csv::Terminator::CRLF).from_writer(Vec::new());
    let write = |w: &mut ::csv::Writer<Vec<u8>>, row: Vec<String>| {
        w.write_record(row).expect("writing to memory");
    };
    write(&mut w, bundle.axes.iter().map(|a| a.name.clone()).collect());
    for p in bundle.user_points() {
        write(&mut w, p.coords().iter().map(|x| x.to_string()).collect());
    }
    let bytes = w.into_inner().expect("flushing to memory");
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{approximate_pareto, EngineConfig};
    use crate::export::Axis;
    use crate::mdp::trade_off_fixture;
    use crate::objective::{normalize_objectives, ObjectiveKind, ObjectiveSpec, Sign};

    fn bundle(specs: &[ObjectiveSpec]) -> ExportBundle {
        let norm = normalize_objectives(&trade_off_fixture(), specs).unwrap();
        ExportBundle::new(approximate_pareto(&norm, &EngineConfig::default()).unwrap(), &norm)
    }

    #[test]
    fn m1_rows() {
        let b = bundle(&[
            ObjectiveSpec::new(ObjectiveKind::RewardMax, "r1"),
            ObjectiveSpec::new(ObjectiveKind::RewardMax, "r2"),
        ]);
        let out = emit_csv(&b).unwrap();
        assert_eq!(out, "reward-max(r1),reward-max(r2)\r\n1,0\r\n0,1\r\n");
    }

    #[test]
    fn single_column_and_user_orientation() {
        let out = emit_csv(&bundle(&[ObjectiveSpec::new(ObjectiveKind::RewardMin, "r1")])).unwrap();
        assert_eq!(out, "reward-min(r1)\r\n0\r\n");
    }

    #[test]
    fn names_with_commas_are_quoted() {
        let mut b = bundle(&[
            ObjectiveSpec::new(ObjectiveKind::RewardMax, "r1"),
            ObjectiveSpec::new(ObjectiveKind::RewardMax, "r2"),
        ]);
        b.axes[0] = Axis {
            name: "cost, \"total\"".into(),
            sign: Sign::Maximize,
        };
        let out = emit_csv(&b).unwrap();
        assert!(out.starts_with("\"cost, \"\"total\"\"\",reward-max(r2)\r\n"), "{out}");
    }
}
