//! JSON shapes for polyhedra and unions.

use serde_json::{json, Value};

use super::{Polyhedron, PolyUnion};
use crate::rational::vec_to_json;

pub fn polyhedron_to_json(p: &Polyhedron) -> Value {
    let hrep: Vec<Value> = p
        .hrep()
        .iter()
        .map(|h| {
            let mut row = h.normal.clone();
            row.push(h.offset.clone());
            vec_to_json(&row)
        })
        .collect();
    let mut v = json!({
        "dim": p.dim(),
        "hrep": hrep,
        "vertices": p.vertices().iter().map(|x| vec_to_json(x)).collect::<Vec<_>>(),
        "rays": p.all_rays().iter().map(|x| vec_to_json(x)).collect::<Vec<_>>(),
    });
    if p.is_empty() {
        v["marker"] = json!("empty");
    } else if p.is_full() {
        v["marker"] = json!("full-space");
    }
    v
}

pub fn union_to_json(u: &PolyUnion) -> Value {
    let mut v = json!({
        "dim": u.dim(),
        "pieces": u.pieces().iter().map(polyhedron_to_json).collect::<Vec<_>>(),
    });
    if u.is_empty() {
        v["marker"] = json!("empty");
    } else if u.pieces().iter().any(Polyhedron::is_full) {
        v["marker"] = json!("full-space");
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qv;

    #[test]
    fn orthant_shape() {
        let p = Polyhedron::cone(2, vec![qv(&[1, 0]), qv(&[0, 1])], vec![]);
        let v = polyhedron_to_json(&p);
        assert_eq!(
            v,
            json!({"dim": 2, "hrep": [["0", "1", "0"], ["1", "0", "0"]], "vertices": [["0", "0"]],
                   "rays": [["0", "1"], ["1", "0"]]})
        );
        assert_eq!(polyhedron_to_json(&Polyhedron::empty(2))["marker"], "empty");
        assert_eq!(polyhedron_to_json(&Polyhedron::full(2))["marker"], "full-space");
    }
}
