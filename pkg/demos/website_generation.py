"""Procedural websites and how hard they are for a random agent.

Each page is a bag of primitives; a random agent clicks one per page and
survives only if it hits an active element.  The product over pages is the
success probability, and its negative log is the difficulty.
"""

import math
import tempfile
from collections import Counter

from agentperf.webgen import GenConfig, estimate_random_success, generate_websites, render_html

sites = generate_websites(GenConfig(num_websites=200, seed=7))
print("level histogram:", dict(sorted(Counter(str(s.level) for s in sites).items())))

site = max(sites, key=lambda s: len(s.pages))
print(f"\n{site.website_id}: {len(site.pages)} pages")
for i, page in enumerate(site.pages, 1):
    print(f"  page {i}: {page.n_active} active / {page.n_passive} passive")
p = math.exp(-site.difficulty_nats)
print(f"  difficulty {site.difficulty_nats:.3f} nats, p(success) {p:.4f}, level {site.level}")
print(f"  Monte Carlo over 100k random agents: {estimate_random_success(site, 100_000):.4f}")

with tempfile.TemporaryDirectory() as out:
    files = render_html(site, out)
    print("\nrendered:", ", ".join(f.name for f in files))
