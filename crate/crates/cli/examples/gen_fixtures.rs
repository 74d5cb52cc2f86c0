//! Regenerate the JSON fixture files from the built-in constructors:
//! `cargo run -p flatcur-cli --example gen_fixtures [dir]`

use flatcur_cli::formats::{curve_to_json, serialize_surface};
use flatcur_core::fixtures;

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".to_string());
    let dir = std::path::Path::new(&dir);
    std::fs::create_dir_all(dir)?;

    let surfaces = [
        ("octagon.json", fixtures::octagon()),
        ("octagon_n2.json", fixtures::octagon_n(2)),
        ("octagon_n4.json", fixtures::octagon_n(4)),
        ("quarter_octagon.json", fixtures::quarter_octagon()),
        ("third_hexagons.json", fixtures::third_hexagons()),
        ("sixth_hexagons.json", fixtures::sixth_hexagons()),
        ("l_shape.json", fixtures::l_shape()),
    ];
    for (name, spec) in &surfaces {
        std::fs::write(dir.join(name), serialize_surface(spec) + "\n")?;
    }

    let curves = [
        ("octagon_vertical_loop.json", fixtures::octagon_vertical_loop()),
        ("octagon_horizontal_loop.json", fixtures::octagon_horizontal_loop()),
        ("octagon_diagonal_loop.json", fixtures::octagon_diagonal_loop()),
        ("octagon_zigzag.json", fixtures::octagon_zigzag()),
    ];
    for (name, c) in &curves {
        std::fs::write(dir.join(name), curve_to_json(c) + "\n")?;
    }
    for (i, c) in fixtures::hexagon_loops().iter().enumerate() {
        std::fs::write(dir.join(format!("hexagon_loop_{i}.json")), curve_to_json(c) + "\n")?;
    }

    let suite = r#"{
  "entries": [
    {
      "surface": "octagon.json",
      "curves": ["octagon_vertical_loop.json", "octagon_horizontal_loop.json", "octagon_diagonal_loop.json"],
      "norms": ["l1", "hexagonal", "web:4:0"],
      "directions": [0.0, 0.7853981633974483]
    },
    {
      "surface": "quarter_octagon.json",
      "curves": ["octagon_vertical_loop.json", "octagon_horizontal_loop.json", "octagon_diagonal_loop.json"],
      "norms": ["l1", "octagonal", "web:4:0.3"],
      "directions": [0.0]
    },
    {
      "surface": "third_hexagons.json",
      "curves": ["hexagon_loop_0.json", "hexagon_loop_1.json", "hexagon_loop_2.json"],
      "norms": ["hexagonal", "web:3:0", "web:3:0.4"],
      "directions": [0.0, 0.5]
    }
  ]
}
"#;
    std::fs::write(dir.join("suite.json"), suite)?;
    println!("fixtures written to {}", dir.display());
    Ok(())
}
