use super::ScenarioConfig;
use crate::{Error, Result};

/// Names accepted by [`builtin_scenario`].
pub const BUILTIN_NAMES: [&str; 3] = ["office", "cabin", "datacentre"];

const OFFICE: &str = include_str!("../../scenarios/office.toml");
const CABIN: &str = include_str!("../../scenarios/cabin.toml");
const DATACENTRE: &str = include_str!("../../scenarios/datacentre.toml");

/// One of the embedded scenarios, parsed with the same loader as user files.
pub fn builtin_scenario(name: &str) -> Result<ScenarioConfig> {
    let text = match name {
        "office" => OFFICE,
        "cabin" => CABIN,
        "datacentre" => DATACENTRE,
        _ => {
            return Err(Error::UnknownScenario {
                name: name.to_string(),
                valid: BUILTIN_NAMES.join(", "),
            })
        }
    };
    ScenarioConfig::from_toml_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    #[test]
    fn office_parameters() {
        let cfg = builtin_scenario("office").unwrap();
        let pos: Vec<Vec3> = cfg.transmitters.iter().map(|t| t.position).collect();
        assert_eq!(
            pos,
            vec![
                Vec3::new(1.0, 1.0, 3.0),
                Vec3::new(1.0, 3.0, 3.0),
                Vec3::new(3.0, 1.0, 3.0),
                Vec3::new(3.0, 3.0, 3.0)
            ]
        );
        for t in &cfg.transmitters {
            assert_eq!(t.ld_count, 9);
            assert_eq!(t.semi_angle, 60.0);
            assert_eq!(t.lambertian_order().unwrap(), 1.0);
            assert!((t.power("red").unwrap() - 7.2).abs() < 1e-12);
            assert!((t.power("yellow").unwrap() - 4.5).abs() < 1e-12);
        }
        assert_eq!(cfg.stations.len(), 8);
        assert_eq!(cfg.stations[3].position, Vec3::new(1.5, 3.5, 1.0));
        let az: Vec<f64> = cfg.stations[0].branches.iter().map(|b| b.azimuth).collect();
        assert_eq!(az, vec![45.0, 135.0, 225.0, 315.0]);
        assert!(cfg.stations[0]
            .branches
            .iter()
            .all(|b| b.elevation == 70.0 && b.fov == 21.0 && b.area == 1e-5));
    }

    #[test]
    fn cabin_parameters() {
        let cfg = builtin_scenario("cabin").unwrap();
        assert_eq!(cfg.transmitters.len(), 6);
        assert_eq!(cfg.stations.len(), 18);
        assert_eq!(cfg.room.width, 3.63);
        for t in &cfg.transmitters {
            assert_eq!(t.ld_count, 3);
            assert_eq!(t.semi_angle, 19.0);
        }
    }

    #[test]
    fn datacentre_parameters() {
        let cfg = builtin_scenario("datacentre").unwrap();
        assert_eq!(cfg.transmitters.len(), 6);
        assert_eq!(cfg.transmitters[0].position, Vec3::new(1.6, 1.5, 3.0));
        assert_eq!(cfg.transmitters[5].position, Vec3::new(4.4, 3.5, 3.0));
        assert_eq!(cfg.stations.len(), 10);
        assert!(cfg.stations.iter().all(|s| s.position.z == 2.0));
        assert_eq!(cfg.blockers.len(), 10);
    }

    #[test]
    fn capacity_invariant_holds() {
        for (name, aps, users) in [("office", 4, 8), ("cabin", 6, 18), ("datacentre", 6, 10)] {
            let cfg = builtin_scenario(name).unwrap();
            assert_eq!(cfg.transmitters.len(), aps);
            assert_eq!(cfg.stations.len(), users);
            assert!(cfg.transmitters.len() * cfg.wavelengths.len() >= cfg.stations.len());
        }
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = builtin_scenario("warehouse").unwrap_err().to_string();
        assert!(err.contains("office") && err.contains("cabin") && err.contains("datacentre"));
    }
}
