"""Walk the review service end to end, in process.

Upload a zip of same-type coins, watch the background job move the
dataset from computing to computed, page through the ranked pairs,
record an evaluation, and download the notations CSV.

Run:  python demos/04_review_service.py   (needs the test extra: httpx)
"""

import io
import tempfile
import time
import zipfile
from pathlib import Path

from fastapi.testclient import TestClient

from dielink.service import ServiceConfig, create_app
from dielink.synthetic import encode_png, make_die_set

workdir = Path(tempfile.mkdtemp(prefix="dielink-demo-"))
config = ServiceConfig(data_dir=workdir, token="demo-token", workers=2)
app = create_app(config)
auth = {"Authorization": "Bearer demo-token"}

coins = make_die_set(seed=5, n_dies=3, coins_per_die=3, canvas=260, radius_range=(80, 100))
archive = io.BytesIO()
with zipfile.ZipFile(archive, "w") as zf:
    for name, raster in coins.items():
        zf.writestr(name, encode_png(raster))

with TestClient(app) as client:
    print("POST /api/datasets (zip of 9 coins) ...")
    response = client.post(
        "/api/datasets",
        files={"archive": ("type_a.zip", archive.getvalue(), "application/zip")},
        data={"name": "type_a"},
        headers=auth,
    )
    ticket = response.json()
    print(f"  {response.status_code}: state={ticket['state']}"
          f" progress={ticket['progress']['scored']}/{ticket['progress']['total']}")

    while True:
        detail = client.get(f"/api/datasets/{ticket['id']}", headers=auth).json()
        state = detail["ticket"]["state"]
        progress = detail["ticket"]["progress"]
        print(f"  polling: {state} {progress['scored']}/{progress['total']}")
        if state != "computing":
            break
        time.sleep(0.5)

    summary = detail["summary"]
    print(f"computed: {summary['coins']} coins, {summary['potential_links']} potential links")

    page = client.get(f"/api/datasets/{ticket['id']}/pairs",
                      params={"offset": 0, "limit": 5}, headers=auth).json()
    print("\ntop of the ranking:")
    for entry in page["entries"]:
        print(f"  {entry['distance']:.4f}  {entry['name1']} / {entry['name2']}")

    best = page["entries"][0]
    print(f"\nPUT evaluation on {best['name1']} / {best['name2']} ...")
    response = client.put(
        f"/api/datasets/{ticket['id']}/pairs/{best['name1']}/{best['name2']}",
        json={"note": "Linked", "comment": "same die break at 2 o'clock"},
        headers=auth,
    )
    categories = response.json()["summary"]["categories"]
    print(f"  summary now: Linked={categories['Linked']},"
          f" Not evaluated={categories['Not evaluated']}")

    export = client.get(f"/api/datasets/{ticket['id']}/export", headers=auth)
    filename = export.headers["content-disposition"].split('filename="')[1].rstrip('"')
    out = workdir / filename
    out.write_bytes(export.content)
    print(f"\ndownloaded {filename} ({len(export.content)} bytes) to {out}")
    print("first lines:")
    for line in export.text.splitlines()[:4]:
        print(f"  {line}")
