"""Procedural website generation and difficulty levels.

A website is built by drawing primitives uniformly from the registry: content
primitives go onto the current page, ``new_page`` closes it and opens the
next, ``stop`` ends the website.  A page's difficulty is ``-ln(p)`` where
``p = n_active / (n_active + n_passive)`` is the chance that a random agent
picks an active primitive; a website's difficulty is the sum over pages.

Reproducibility
---------------
Draws use SplitMix64, implemented here so output does not depend on the
Python or NumPy version.  Website ``i`` of a run seeded with ``seed`` uses the
stream seeded with ``website_seed(seed, i) = mix64(seed + (i + 1) * GOLDEN)``
(mod 2**64).  Regenerations and level-filter retries continue that stream.
Bounded integers use rejection sampling on the raw 64-bit outputs.
"""

from __future__ import annotations

import html
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import (
    CONTROL_PRIMITIVES,
    PageSpec,
    PrimitiveDef,
    WebsiteSpec,
    validate,
)

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

LEVEL_THRESHOLDS = {1: 0.50, 2: 0.25, 3: 0.10}
# relative slack so that e.g. exp(-2 ln 2) lands on the 0.25 edge
_EDGE_RTOL = 1e-12


class WebgenError(ValueError):
    pass


def mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n


def website_seed(seed: int, index: int) -> int:
    return mix64((seed + (index + 1) * GOLDEN) & MASK64)


# 42 content primitives.  Active ones must be interacted with (form fields,
# buttons); passive ones must be left alone (chrome, ads, distracting links).
_ACTIVE = (
    "input_first_name", "input_last_name", "input_full_name", "input_username",
    "input_email", "input_password", "input_password_confirm", "input_address_line1",
    "input_address_line2", "input_city", "input_state", "input_zipcode", "input_phone",
    "input_captcha", "input_promo_code", "button_promo_apply", "checkbox_remember_me",
    "checkbox_stay_logged_in", "checkbox_terms", "select_country", "select_birth_date",
    "radio_shipping_method", "input_card_number", "input_card_cvv", "input_card_expiry",
    "textarea_comment", "button_next", "button_submit",
)
_PASSIVE = (
    "navbar", "header", "footer", "label", "carousel", "product_deck", "cart_summary",
    "ad_banner", "link_malicious", "link_forgot_password", "link_forgot_username",
    "link_social_media", "breadcrumb", "image_banner",
)


@dataclass(frozen=True)
class PrimitiveRegistry:
    entries: tuple[PrimitiveDef, ...]

    @classmethod
    def default(cls) -> "PrimitiveRegistry":
        return cls(
            tuple(PrimitiveDef(n, "active") for n in _ACTIVE)
            + tuple(PrimitiveDef(n, "passive") for n in _PASSIVE)
            + tuple(PrimitiveDef(n, "control") for n in CONTROL_PRIMITIVES)
        )

    @classmethod
    def from_json(cls, text: str, path: str = "<registry>") -> "PrimitiveRegistry":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise WebgenError(f"{path}:{exc.lineno}: malformed JSON: {exc.msg}") from None
        if not isinstance(doc, dict) or not isinstance(doc.get("primitives"), list):
            raise WebgenError(f"{path}: registry must be an object with a 'primitives' list")
        entries = []
        for i, e in enumerate(doc["primitives"]):
            if not isinstance(e, dict) or not isinstance(e.get("name"), str) or not isinstance(e.get("kind"), str):
                raise WebgenError(f"{path}: primitives[{i}] needs string 'name' and 'kind'")
            entries.append(PrimitiveDef(e["name"], e["kind"]))
        reg = cls(tuple(entries))
        problems = reg.violations()
        if problems:
            raise WebgenError(f"{path}: invalid registry: " + "; ".join(problems))
        return reg

    def violations(self) -> list[str]:
        out = []
        for i, p in enumerate(self.entries):
            out.extend(f"entries[{i}].{v}" for v in validate(p))
        names = [p.name for p in self.entries]
        if len(set(names)) != len(names):
            out.append("entries: names unique")
        if sorted(p.name for p in self.entries if p.kind == "control") != sorted(CONTROL_PRIMITIVES):
            out.append("entries: exactly the control primitives new_page and stop")
        kinds = {p.kind for p in self.entries}
        if "active" not in kinds or "passive" not in kinds:
            out.append("entries: at least one active and one passive primitive")
        return out


@dataclass(frozen=True)
class GenConfig:
    num_websites: int
    seed: int = 0
    registry: PrimitiveRegistry = field(default_factory=PrimitiveRegistry.default)
    max_primitives_per_website: int = 200
    level_filter: int | None = None
    max_retries: int = 10_000


@dataclass
class GenStats:
    """Counters from a generation run."""
    regenerated_empty: int = 0
    regenerated_oversize: int = 0
    dropped_passive_pages: int = 0
    level_rejections: int = 0
    draws: list[int] = field(default_factory=list)


def page_difficulty(page: PageSpec) -> float:
    a, p = page.n_active, page.n_passive
    if a < 1:
        raise WebgenError("page has no active primitive; difficulty is infinite")
    return -math.log(a / (a + p))


def website_difficulty(site_or_pages) -> float:
    pages = site_or_pages.pages if isinstance(site_or_pages, WebsiteSpec) else site_or_pages
    return math.fsum(page_difficulty(pg) for pg in pages)


def level_for_probability(p: float) -> int | None:
    for level in (1, 2, 3):
        if p >= LEVEL_THRESHOLDS[level] * (1.0 - _EDGE_RTOL):
            return level
    return None


def difficulty_level(site_or_nats) -> int | None:
    """Level 1 for p >= 0.5, 2 for [0.25, 0.5), 3 for [0.1, 0.25), else None (unclassified)."""
    nats = site_or_nats.difficulty_nats if isinstance(site_or_nats, WebsiteSpec) else site_or_nats
    return level_for_probability(math.exp(-nats))


def _draw_site(rng: SplitMix64, prims: tuple[PrimitiveDef, ...], config: GenConfig,
               stats: GenStats) -> tuple[PageSpec, ...]:
    """One website's pages, regenerating until it has a usable page."""
    while True:
        pages: list[PageSpec] = []
        current: list[PrimitiveDef] = []
        placed = 0
        oversize = False
        while True:
            idx = rng.below(len(prims))
            stats.draws.append(idx)
            prim = prims[idx]
            if prim.kind != "control":
                current.append(prim)
                placed += 1
                if placed > config.max_primitives_per_website:
                    oversize = True
                    break
                continue
            if current and not any(p.kind == "active" for p in current):
                # passive-only page: discard it along with its terminator and redraw the page
                stats.dropped_passive_pages += 1
                placed -= len(current)
                current = []
                continue
            if current:
                pages.append(PageSpec(tuple(current)))
                current = []
            if prim.name == "stop":
                break
        if oversize:
            stats.regenerated_oversize += 1
            continue
        if not pages:
            stats.regenerated_empty += 1
            continue
        return tuple(pages)


def generate_websites(config: GenConfig, stats: GenStats | None = None) -> list[WebsiteSpec]:
    """Generate ``config.num_websites`` websites, deterministically in ``config.seed``."""
    problems = config.registry.violations()
    if problems:
        raise WebgenError("invalid registry: " + "; ".join(problems))
    if config.num_websites < 1:
        raise WebgenError("num_websites must be positive")
    if config.level_filter not in (None, 1, 2, 3):
        raise WebgenError(f"level_filter must be 1, 2 or 3, got {config.level_filter}")
    stats = stats if stats is not None else GenStats()
    prims = config.registry.entries
    sites = []
    for i in range(config.num_websites):
        sub_seed = website_seed(config.seed, i)
        rng = SplitMix64(sub_seed)
        for attempt in range(config.max_retries):
            pages = _draw_site(rng, prims, config, stats)
            nats = website_difficulty(pages)
            level = difficulty_level(nats)
            if config.level_filter is None or level == config.level_filter:
                break
            stats.level_rejections += 1
        else:
            raise WebgenError(
                f"website {i}: no level-{config.level_filter} site after {config.max_retries} attempts"
            )
        sites.append(WebsiteSpec(f"site-{i:05d}", sub_seed, pages, nats, level))
    return sites


def estimate_random_success(site: WebsiteSpec, trials: int, seed: int = 0) -> float:
    """Monte Carlo success rate of an agent that picks one primitive uniformly per page.

    A page succeeds when the pick is active; the site succeeds when every page does.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    ok = np.ones(trials, dtype=bool)
    for page in site.pages:
        n = page.n_active + page.n_passive
        # actives are indices [0, n_active) without loss of generality
        ok &= rng.integers(0, n, size=trials) < page.n_active
    return float(ok.sum()) / trials


# --- serialization and rendering --------------------------------------------

def site_to_dict(site: WebsiteSpec) -> dict:
    return {
        "website_id": site.website_id,
        "seed": site.seed,
        "pages": [{"primitives": [{"name": p.name, "kind": p.kind} for p in pg.primitives]} for pg in site.pages],
        "difficulty_nats": site.difficulty_nats,
        "level": site.level if site.level is not None else "unclassified",
    }


def site_to_json(site: WebsiteSpec) -> str:
    return json.dumps(site_to_dict(site), sort_keys=True, indent=2) + "\n"


def site_from_dict(doc: dict) -> WebsiteSpec:
    level = doc["level"]
    pages = tuple(
        PageSpec(tuple(PrimitiveDef(p["name"], p["kind"]) for p in pg["primitives"]))
        for pg in doc["pages"]
    )
    return WebsiteSpec(
        doc["website_id"], doc["seed"], pages, float(doc["difficulty_nats"]),
        None if level == "unclassified" else level,
    )


def _element(prim: PrimitiveDef, i: int) -> str:
    attrs = f'id="p{i}" data-primitive="{html.escape(prim.name)}" data-kind="{prim.kind}"'
    label = html.escape(prim.name.replace("_", " "))
    head = prim.name.split("_", 1)[0]
    if head == "input":
        kind = "password" if "password" in prim.name else "text"
        return f'<input type="{kind}" name="{html.escape(prim.name)}" {attrs}>'
    if head in ("checkbox", "radio"):
        return f'<input type="{head}" name="{html.escape(prim.name)}" {attrs}>'
    if head == "select":
        return f'<select name="{html.escape(prim.name)}" {attrs}><option>{label}</option></select>'
    if head == "textarea":
        return f'<textarea name="{html.escape(prim.name)}" {attrs}></textarea>'
    if head == "button":
        return f'<button type="button" {attrs}>{label}</button>'
    if head == "link":
        return f'<a href="#" {attrs}>{label}</a>'
    if prim.name in ("navbar", "header", "footer", "label"):
        tag = "nav" if prim.name == "navbar" else prim.name
        return f"<{tag} {attrs}>{label}</{tag}>"
    if prim.name == "image_banner":
        return f'<img alt="{label}" {attrs}>'
    return f"<div {attrs}>{label}</div>"


def render_html(site: WebsiteSpec, out_dir) -> list[Path]:
    """Write one HTML file per page plus a ``website.json`` sidecar; re-rendering is byte-identical."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    n = len(site.pages)
    for k, page in enumerate(site.pages, start=1):
        body = "\n".join(f"  {_element(p, i)}" for i, p in enumerate(page.primitives))
        nav = f'  <a class="next" href="page_{k + 1:02d}.html">next</a>\n' if k < n else ""
        doc = (
            "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
            f"<title>{html.escape(site.website_id)} page {k} of {n}</title>\n</head>\n<body>\n"
            f"<form>\n{body}\n</form>\n{nav}</body>\n</html>\n"
        )
        path = out / f"page_{k:02d}.html"
        path.write_text(doc, encoding="utf-8")
        paths.append(path)
    sidecar = out / "website.json"
    sidecar.write_text(site_to_json(site), encoding="utf-8")
    paths.append(sidecar)
    return paths
