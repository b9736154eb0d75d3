"""2-D embedding of the distance matrix with provisional clusters.

Classical metric MDS projects the coins onto a plane where embedded
distances approximate the scored ones, and single-linkage clustering at a
threshold proposes provisional die groups. Proposals support the visual
review; they are not authoritative results.

Run:  python demos/03_cluster_view.py   (writes cluster_view.png)
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from dielink.analytics import cluster, embed_2d
from dielink.imaging import load_normalized
from dielink.scoring import score_dataset
from dielink.synthetic import encode_png, make_die_set

coins = make_die_set(seed=7, n_dies=3, coins_per_die=4, canvas=300, radius_range=(95, 110))
images = [load_normalized(encode_png(img), name)[0] for name, img in sorted(coins.items())]
print(f"scoring {len(images)} coins ...")
matrix = score_dataset(images, seed=0)

points = embed_2d(matrix)
labels = {l.coin_name: l.cluster_id for l in cluster(matrix, threshold=0.45)}
print("provisional clusters at threshold 0.45:")
for point in points:
    print(f"  {point.coin_name}: cluster {labels[point.coin_name]}"
          f"  ({point.x:+.3f}, {point.y:+.3f})")

fig, ax = plt.subplots(figsize=(5, 5))
palette = ["#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee"]
for point in points:
    color = palette[labels[point.coin_name] % len(palette)]
    ax.scatter(point.x, point.y, color=color, s=80)
    ax.annotate(point.coin_name.replace(".png", ""), (point.x, point.y),
                fontsize=7, xytext=(4, 4), textcoords="offset points")
ax.set_title("Cluster view (provisional groupings)")
ax.set_aspect("equal")
fig.tight_layout()
fig.savefig("cluster_view.png", dpi=120)
print("wrote cluster_view.png")
