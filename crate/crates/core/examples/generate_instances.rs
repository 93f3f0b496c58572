//! Seeded instances and the closed-form fixtures, written as JSON.

use ellipsoid_distance::instance::{parse_instance, to_json};
use ellipsoid_distance::probgen::{analytic_instance, gen_convex, InstanceSpec, Protocol, CATALOG};

fn main() -> ellipsoid_distance::Result<()> {
    let (a, b) = gen_convex(3, 42)?;
    let json = to_json(&a, &b);
    println!("{json}");
    let (c, d) = parse_instance(&json, "memory").expect("written instance parses");
    assert!(a == c && b == d);

    let spec = InstanceSpec {
        d: 4,
        seed: 1,
        protocol: Protocol::NonconvexNested,
    };
    let (inner, outer) = spec.generate()?;
    println!("nested pair: z1 {:?}, z2 {:?}", inner.center().as_slice(), outer.center().as_slice());

    for name in CATALOG {
        let f = analytic_instance(name, 2)?;
        println!("{name:<22} convex {:>4}  boundary {:>4}", f.convex_distance, f.boundary_distance);
    }
    Ok(())
}
