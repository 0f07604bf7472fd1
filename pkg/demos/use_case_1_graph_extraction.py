"""Use case 1: turning driving frames into multi-relational scene-graphs.

Generates a small synthetic corpus, extracts the graph of every frame,
and prints one clip's final frame as DOT (pipe it into graphviz to see
the picture).
"""

from roadgraph import ExtractionConfig, export_dot, extract_sequence
from roadgraph.synth import ScenarioConfig, generate_dataset


def main() -> None:
    dataset = generate_dataset(ScenarioConfig(n_safe=2, n_risky=2, frames=10), seed=3)
    cfg = ExtractionConfig()

    print("proximity bands:",
          ", ".join(f"{name} <= {t:g} ft" for name, t in cfg.proximity_thresholds))
    print()

    for clip in dataset.clips:
        graphs = extract_sequence(clip, cfg)
        total_edges = sum(len(g.edges) for g in graphs)
        label = "risky" if clip.label else "safe"
        print(f"{clip.clip_id} ({label}): {len(graphs)} graphs, "
              f"{total_edges} edges total")
        final = graphs[-1]
        relations = sorted({e.relation for e in final.edges})
        print(f"  final frame relations: {', '.join(relations)}")

    risky = next(c for c in dataset.clips if c.label == 1)
    final_graph = extract_sequence(risky, cfg)[-1]
    print()
    print(f"DOT for {risky.clip_id}, frame {final_graph.frame_index}:")
    print(export_dot(final_graph, cfg))


if __name__ == "__main__":
    main()
