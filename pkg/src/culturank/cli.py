"""``culturank`` command line.

Every subcommand reads its inputs from flags, a flat ``key=value`` config file
(``--config`` or ``$CULTURANK_CONFIG``) or built-in defaults, in that order of
precedence. Outputs go to ``--out-dir``; a JSON run summary is printed to
stdout. Exit status: 0 success, 1 validation error, 2 I/O error, 64 usage.
"""

import argparse
import csv
import json
import os
import sys

from . import ingest, lexsim, metrics, pipeline, stats, taxonomy as tx
from .choropleth import choropleth
from .concept_graph import load_concept_graph, load_stoplist
from .errors import CulturankError, ParseError

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_USAGE = 0, 1, 2, 64
CONFIG_ENV = "CULTURANK_CONFIG"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _years(text):
    """``"2010"``, ``"2010-2014"`` or ``"2010,2012"`` to a list of ints."""
    text = str(text).strip()
    out = []
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError(f"empty year list {text!r}")
    return out


def _depth(text):
    text = str(text).strip()
    return "exact" if text == "exact" else int(text)


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _nonneg_float(text):
    v = float(text)
    if v < 0:
        raise ValueError("must be >= 0")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise ValueError("must be >= 0")
    return v


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise ValueError("must be >= 1")
    return v


# name -> (type, default, is_input_path, help)
OPTIONS = {
    "out_dir": (str, "out", False, "output directory"),
    "workers": (_pos_int, 1, False, "worker processes (outputs do not depend on it)"),
    "records": (str, None, True, "NDJSON media records"),
    "neighborhoods": (str, None, True, "GeoJSON neighbourhood polygons"),
    "taxonomy": (str, None, True, "taxonomy JSON"),
    "census": (str, None, True, "census CSV"),
    "graph_edges": (str, None, True, "concept graph edge TSV"),
    "graph_titles": (str, None, True, "concept graph slug/title TSV"),
    "stoplist": (str, None, True, "stoplist, one slug or term per line"),
    "candidates": (str, None, True, "candidate TSV (term, code[s])"),
    "decisions": (str, None, True, "'is-a' decisions TSV"),
    "pairs": (str, None, True, "co-occurrence pairs TSV"),
    "seeds": (str, None, True, "seed term TSV (term, code[s])"),
    "lexgraph": (str, None, True, "lexical graph TSV"),
    "terms": (str, None, True, "term TSV (term, codes)"),
    "labels": (str, None, True, "agreement labels TSV"),
    "capital": (str, None, True, "capital CSV (location, kind, value)"),
    "category_capital": (str, None, True, "category capital CSV"),
    "diversity": (str, None, True, "diversity CSV"),
    "x": (str, None, True, "first CSV for correlation"),
    "y": (str, None, True, "second CSV for correlation"),
    "depth": (_depth, 20, False, "path-similarity depth: integer or 'exact'"),
    "count": (_nonneg_int, tx.DEFAULT_COOCCURRENCE_THRESHOLD, False, "co-occurrence threshold"),
    "t_min": (_nonneg_int, 100, False, "sweep start"),
    "t_max": (_nonneg_int, 2500, False, "sweep end"),
    "step": (_pos_int, 100, False, "sweep step"),
    "min_agreement": (_nonneg_float, tx.DEFAULT_MIN_AGREEMENT, False, "agreement cut-off"),
    "local_mode": (str, "span", False, "local-user rule: span or days"),
    "local_days": (_nonneg_float, ingest.DEFAULT_LOCAL_DAYS, False, "local-user days"),
    "years": (_years, None, False, "restrict records to these UTC years"),
    "econ_years": (_years, [2010], False, "income years averaged for economic capital"),
    "fence": (_nonneg_float, metrics.DEFAULT_FENCE, False, "Tukey fence multiplier"),
    "denominator": (str, "all", False, "monthly fraction denominator: all or cultural"),
    "dev_year": (int, 2015, False, "year of the development response"),
    "delta_from": (int, None, False, "model dev(dev_year) - dev(delta_from)"),
    "with_": (str, "", False, "extra regressors: penetration,diversity"),
    "price_years": (_years, [2015], False, "house-price years averaged"),
    "economic_only": (_bool, False, False, "fit the economic-only house-price model"),
    "level": (str, "macro", False, "silhouette clusters: macro or sub"),
    "kind": (str, "cultural", False, "capital kind to map"),
    "field": (str, "dev", False, "census field"),
    "from_year": (int, None, False, "earlier year"),
    "to_year": (int, None, False, "later year"),
    "x_kind": (str, None, False, "kind filter for --x"),
    "y_kind": (str, None, False, "kind filter for --y"),
    "x_column": (str, "value", False, "value column of --x"),
    "y_column": (str, "value", False, "value column of --y"),
    "out": (str, None, False, "output file name"),
}

COMMON = ("out_dir", "workers")

COMMANDS = {
    "taxonomy-expand": (("graph_edges", "graph_titles"), ("stoplist",)),
    "taxonomy-isa": (("candidates", "decisions"), ()),
    "taxonomy-cooccur": (("records", "seeds"), ()),
    "taxonomy-sweep": (("pairs", "lexgraph"), ("depth", "t_min", "t_max", "step")),
    "taxonomy-threshold": (("pairs",), ("count", "seeds")),
    "taxonomy-clean": (("terms", "labels"), ("min_agreement", "lexgraph", "depth")),
    "taxonomy-silhouette": (("lexgraph",), ("taxonomy", "terms", "depth", "level")),
    "assign": (("records", "neighborhoods"), ("local_mode", "local_days", "years")),
    "capital": (("records", "neighborhoods", "taxonomy"),
                ("census", "econ_years", "local_mode", "local_days", "years")),
    "category-capital": (("records", "neighborhoods", "taxonomy"),
                         ("local_mode", "local_days", "years")),
    "specialize": (("records", "neighborhoods", "taxonomy"), ("local_mode", "local_days", "years")),
    "diversity": (("records", "neighborhoods", "taxonomy"), ("local_mode", "local_days", "years")),
    "monthly": (("records", "neighborhoods", "taxonomy"),
                ("local_mode", "local_days", "years", "denominator")),
    "events": (("records", "neighborhoods", "taxonomy"),
               ("local_mode", "local_days", "years", "denominator", "fence")),
    "regress-dev": (("capital", "census"),
                    ("dev_year", "delta_from", "econ_years", "with_", "diversity")),
    "regress-house": (("capital", "census"), ("price_years", "econ_years", "economic_only")),
    "regress-category": (("category_capital", "capital", "census"), ("price_years", "econ_years")),
    "delta": (("census", "from_year", "to_year"), ("field",)),
    "correlate": (("x", "y"), ("x_kind", "y_kind", "x_column", "y_column")),
    "choropleth": (("capital", "neighborhoods"), ("kind", "out")),
}


def _flag(name):
    return "--" + name.rstrip("_").replace("_", "-")


def build_parser():
    parser = _Parser(prog="culturank", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="key=value config file")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for cmd, (required, optional) in COMMANDS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", default=None, help="key=value config file")
        for name in COMMON + required + optional:
            typ, default, _, help_ = OPTIONS[name]
            if typ is _bool:
                sp.add_argument(_flag(name), dest=name, action="store_const", const=True,
                                default=None, help=help_)
            else:
                sp.add_argument(_flag(name), dest=name, default=None, help=f"{help_} (default: {default})")
    return parser


def read_config(path):
    """Parse a flat ``key=value`` file; ``#`` starts a comment line."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected key=value", path=path, line=lineno)
            k, v = line.split("=", 1)
            k = k.strip().replace("-", "_")
            if k == "with":
                k = "with_"
            out[k] = v.strip()
    return out


def resolve(args):
    """Merge flags over config over defaults; convert and validate."""
    required, optional = COMMANDS[args.command]
    cfg_path = args.config or os.environ.get(CONFIG_ENV)
    file_cfg = read_config(cfg_path) if cfg_path else {}
    eff = {}
    for name in COMMON + required + optional:
        typ, default, _, _ = OPTIONS[name]
        raw = getattr(args, name)
        if raw is None:
            raw = file_cfg.get(name)
        if raw is None:
            if name in required:
                raise UsageError(f"culturank {args.command}: missing required {_flag(name)}")
            eff[name] = default
            continue
        try:
            eff[name] = typ(raw)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"culturank {args.command}: bad value for {_flag(name)}: {exc}") from None
    for name, value in eff.items():
        if OPTIONS[name][2] and value is not None and not os.path.isfile(value):
            raise FileNotFoundError(f"{_flag(name)}: no such file: {value}")
    if "local_mode" in eff and eff["local_mode"] not in ("span", "days"):
        raise UsageError("--local-mode must be 'span' or 'days'")
    if "denominator" in eff and eff["denominator"] not in ("all", "cultural"):
        raise UsageError("--denominator must be 'all' or 'cultural'")
    if "level" in eff and eff["level"] not in ("macro", "sub"):
        raise UsageError("--level must be 'macro' or 'sub'")
    if "t_min" in eff and eff["t_min"] > eff["t_max"]:
        raise UsageError("--t-min must not exceed --t-max")
    eff["config"] = cfg_path
    return eff


# -- small file helpers -----------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _write_term_table(path, terms):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in sorted(terms):
            codes = ",".join(str(c) for c in sorted(terms[t], key=str))
            fh.write(f"{t}\t{codes}\n")
    return path


def read_term_table(path):
    """``term \\t codes[\\t ...]`` rows into ``{term: set}``; codes are ints when numeric."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) < 2:
                raise ParseError("expected 'term<TAB>codes'", path=path, line=lineno)
            codes = {int(c) if c.strip().isdigit() else c.strip()
                     for c in cols[1].split(",") if c.strip()}
            out.setdefault(tx.normalize_term(cols[0]), set()).update(codes)
    return out


def read_value_csv(path, kind=None, column="value"):
    """``{location: float}`` from a CSV with a ``location`` column."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or ()
        if "location" not in fields or column not in fields:
            raise ParseError(f"CSV needs 'location' and {column!r} columns", path=path, line=1)
        for lineno, row in enumerate(reader, 2):
            if kind is not None and row.get("kind") != kind:
                continue
            text = (row.get(column) or "").strip()
            if not text:
                continue
            try:
                out[row["location"]] = float(text)
            except ValueError:
                raise ParseError(f"not a number: {text!r}", path=path, line=lineno) from None
    return out


def read_capital_kinds(path):
    """``{kind: {location: value}}`` from a capital CSV."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if set(reader.fieldnames or ()) < {"location", "kind", "value"}:
            raise ParseError("capital CSV needs location,kind,value", path=path, line=1)
        for lineno, row in enumerate(reader, 2):
            try:
                out.setdefault(row["kind"], {})[row["location"]] = float(row["value"])
            except ValueError:
                raise ParseError(f"bad value {row['value']!r}", path=path, line=lineno) from None
    return out


def _capital_rows(vectors):
    return [(loc, vec.kind, v) for vec in vectors for loc, v in sorted(vec.values.items())]


def _city(cfg):
    return pipeline.load_city(cfg["records"], cfg["neighborhoods"], cfg["taxonomy"],
                              local_days=cfg["local_days"], local_mode=cfg["local_mode"],
                              years=cfg["years"], workers=cfg["workers"])


def _out(cfg, name):
    return os.path.join(cfg["out_dir"], name)


# -- handlers ---------------------------------------------------------------------------------

def cmd_taxonomy_expand(cfg):
    graph = load_concept_graph(cfg["graph_edges"], cfg["graph_titles"])
    stop = load_stoplist(cfg["stoplist"]) if cfg["stoplist"] else frozenset()
    cands = tx.expand_subcategories(tx.seed_categories(), graph, stop)
    path = _out(cfg, "candidates.tsv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for c in cands:
            fh.write(f"{c.term}\t{c.code}\t{c.node}\n")
    return [path], {"candidates": len(cands), "terms": len({c.term for c in cands})}


def cmd_taxonomy_isa(cfg):
    terms = read_term_table(cfg["candidates"])
    res = tx.apply_isa_decisions(terms, cfg["decisions"])
    path = _write_term_table(_out(cfg, "isa_kept.tsv"), res.kept)
    return [path], {"kept": len(res.kept), "rejected": len(res.rejected), "missing": res.missing}


def cmd_taxonomy_cooccur(cfg):
    seeds = read_term_table(cfg["seeds"])
    stream = ingest.load_records(cfg["records"])
    pairs = tx.mine_cooccurrences(stream, seeds, workers=cfg["workers"])
    path = _out(cfg, "pairs.tsv")
    tx.write_pairs(pairs, path)
    return [path], {"pairs": len(pairs), "records_skipped": stream.skipped}


def _lex(cfg):
    g = lexsim.LexGraph.load(cfg["lexgraph"])
    return g, lexsim.graph_depth(g, cfg["depth"])


def cmd_taxonomy_sweep(cfg):
    pairs = tx.read_pairs(cfg["pairs"])
    g, depth = _lex(cfg)
    rows = tx.threshold_sweep(pairs, g, depth, cfg["t_min"], cfg["t_max"], cfg["step"])
    path = _out(cfg, "sweep.csv")
    tx.write_sweep_csv(rows, path)
    return [path], {"thresholds": len(rows), "depth": depth}


def cmd_taxonomy_threshold(cfg):
    pairs = tx.read_pairs(cfg["pairs"])
    attribution = read_term_table(cfg["seeds"]) if cfg["seeds"] else None
    kept = tx.apply_threshold(pairs, cfg["count"], attribution)
    path = _write_term_table(_out(cfg, "retained.tsv"), kept)
    return [path], {"retained": len(kept), "threshold": cfg["count"]}


def cmd_taxonomy_clean(cfg):
    terms = read_term_table(cfg["terms"])
    res = tx.agreement_clean(terms, cfg["labels"], cfg["min_agreement"])
    outputs = [_write_term_table(_out(cfg, "cleaned.tsv"), res.kept)]
    report = {"kept": len(res.kept), "dropped": res.dropped, "unlabeled": res.unlabeled}
    if cfg["lexgraph"]:
        g, depth = _lex(cfg)
        final = tx.attach_terms(res.kept, g, depth)
        path = _out(cfg, "taxonomy.json")
        final.save(path)
        outputs.append(path)
        report["terms_attached"] = len(final.terms)
    return outputs, report


def cmd_taxonomy_silhouette(cfg):
    if cfg["taxonomy"]:
        terms = {t: {c} for t, c in tx.Taxonomy.load(cfg["taxonomy"]).terms.items()}
    elif cfg["terms"]:
        terms = read_term_table(cfg["terms"])
    else:
        raise UsageError("culturank taxonomy-silhouette: need --taxonomy or --terms")
    if cfg["level"] == "macro":
        assignment = {t: tx.macro_code(min(c)) for t, c in terms.items()}
    else:
        assignment = {t: min(c) for t, c in terms.items()}
    g, depth = _lex(cfg)
    rep = tx.silhouette(assignment, g, depth)
    rows = [(t, rep.cluster[t], rep.values[t], "zero" if t in rep.flagged else "")
            for t in sorted(rep.values)]
    path = _write_csv(_out(cfg, "silhouette.csv"), ["term", "cluster", "s", "flag"], rows)
    return [path], {"summary": rep.summary(), "singletons": rep.singletons, "unknown": rep.unknown}


def cmd_assign(cfg):
    stream = ingest.load_records(cfg["records"])
    records = list(stream)
    local = ingest.local_user_filter(records, cfg["local_days"], cfg["local_mode"])
    if cfg["years"]:
        yrs = set(cfg["years"])
        local = [r for r in local if pipeline._year_of(r.timestamp) in yrs]
    nbs = ingest.load_neighborhoods(cfg["neighborhoods"])
    assigned = ingest.assign_all(local, nbs, workers=cfg["workers"])
    rows = sorted((r.id, loc) for loc, r in assigned)
    path = _write_csv(_out(cfg, "assignments.csv"), ["record", "location"], rows)
    return [path], {"records_read": stream.read, "records_skipped": stream.skipped,
                    "records_local": len(local),
                    "unassigned": sum(1 for loc, _ in assigned if loc is None)}


def _excluded(*vectors):
    return {v.kind: v.excluded for v in vectors if v.excluded}


def cmd_capital(cfg):
    city = _city(cfg)
    vecs = [metrics.cultural_capital(city.stats), metrics.penetration(city.stats)]
    if cfg["census"]:
        census = ingest.load_census(cfg["census"])
        vecs.append(metrics.economic_capital(census, cfg["econ_years"], locations=city.stats))
    path = _write_csv(_out(cfg, "capital.csv"), ["location", "kind", "value"], _capital_rows(vecs))
    return [path], dict(city.report, excluded=_excluded(*vecs))


def cmd_category_capital(cfg):
    city = _city(cfg)
    caps = metrics.category_capitals(city.stats)
    path = _write_csv(_out(cfg, "category_capital.csv"), ["location", "kind", "value"],
                      _capital_rows(caps.values()))
    skipped = [c for c in sorted(tx.CATEGORIES) if c not in caps]
    return [path], dict(city.report, degenerate_categories=skipped, excluded=_excluded(*caps.values()))


def cmd_specialize(cfg):
    city = _city(cfg)
    caps = metrics.category_capitals(city.stats)
    rows = []
    for loc in city.stats:
        code = metrics.specialization(caps, loc)
        rows.append((loc, code, tx.CATEGORIES.get(code)))
    path = _write_csv(_out(cfg, "specialization.csv"), ["location", "code", "label"], rows)
    return [path], dict(city.report, undefined=[r[0] for r in rows if r[1] is None])


def cmd_diversity(cfg):
    city = _city(cfg)
    rows, undefined = [], []
    for loc, st in city.stats.items():
        if st.n_cultural == 0:
            undefined.append(loc)
            continue
        est = metrics.diversity(st)
        rows.append((loc, st.n_cultural, est.bins, est.plugin, float(est.correction), est.value))
    path = _write_csv(_out(cfg, "diversity.csv"),
                      ["location", "n_cultural", "bins", "plugin", "correction", "value"], rows)
    return [path], dict(city.report, undefined=undefined)


def _monthly_all(city, cfg):
    series, skipped = {}, {}
    for loc, st in city.stats.items():
        try:
            series[loc] = metrics.monthly_capital(st, cfg["denominator"])
        except CulturankError as exc:
            skipped[loc] = str(exc)
    return series, skipped


def cmd_monthly(cfg):
    city = _city(cfg)
    series, skipped = _monthly_all(city, cfg)
    rows = []
    for loc, mc in series.items():
        for month in sorted(set(mc.z) | set(mc.gaps)):
            if month in mc.z:
                rows.append((loc, month, mc.fractions[month], mc.z[month], ""))
            else:
                rows.append((loc, month, None, None, "gap"))
    path = _write_csv(_out(cfg, "monthly.csv"), ["location", "month", "fraction", "z", "flag"], rows)
    return [path], dict(city.report, skipped=skipped)


def cmd_events(cfg):
    city = _city(cfg)
    series, skipped = _monthly_all(city, cfg)
    rows = []
    for loc, mc in series.items():
        try:
            peaks = metrics.detect_events(mc.z, cfg["fence"], city.stats[loc].month_terms, loc)
        except CulturankError as exc:
            skipped[loc] = str(exc)
            continue
        rows += [(p.location, p.month, p.z, p.fence, ";".join(p.top_terms)) for p in peaks]
    path = _write_csv(_out(cfg, "events.csv"), ["location", "month", "z", "fence", "top_terms"], rows)
    return [path], dict(city.report, events=len(rows), skipped=skipped)


def _economic(cfg, kinds):
    if "economic" in kinds:
        return kinds["economic"]
    census = ingest.load_census(cfg["census"])
    return metrics.economic_capital(census, cfg["econ_years"]).values


def _regression_outputs(cfg, result, stem):
    rows = [r + (stats.stars(r[4]),) for r in result.rows()]
    rows.append(("R2", result.r2, None, None, None, ""))
    rows.append(("n", result.n, None, None, None, ""))
    rows.append(("dropped", result.dropped, None, None, None, ""))
    csv_path = _write_csv(_out(cfg, f"{stem}.csv"), ["term", "coef", "se", "t", "p", "stars"], rows)
    txt_path = _out(cfg, f"{stem}.txt")
    with open(txt_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(result.to_text())
    return [csv_path, txt_path]


def _result_report(result):
    return {"coef": dict(zip(result.names, map(float, result.coef))),
            "p": dict(zip(result.names, map(float, result.p))),
            "r2": result.r2, "n": result.n, "dropped_locations": list(result.dropped_locations)}


def cmd_regress_dev(cfg):
    kinds = read_capital_kinds(cfg["capital"])
    if "cultural" not in kinds:
        raise ParseError("capital CSV has no 'cultural' rows", path=cfg["capital"])
    census = ingest.load_census(cfg["census"])
    dev = census.series("dev", cfg["dev_year"])
    name = f"dev_{cfg['dev_year']}"
    if cfg["delta_from"] is not None:
        dev = stats.delta(dev, census.series("dev", cfg["delta_from"])).values
        name = f"delta_dev_{cfg['delta_from']}_{cfg['dev_year']}"
    extras = {}
    for extra in filter(None, (e.strip() for e in cfg["with_"].split(","))):
        if extra == "penetration":
            if "penetration" not in kinds:
                raise ParseError("capital CSV has no 'penetration' rows", path=cfg["capital"])
            extras["penetration"] = kinds["penetration"]
        elif extra == "diversity":
            if not cfg["diversity"]:
                raise UsageError("culturank regress-dev: --with diversity needs --diversity")
            extras["diversity"] = read_value_csv(cfg["diversity"])
        else:
            raise UsageError(f"culturank regress-dev: unknown extra regressor {extra!r}")
    res = stats.model_development(kinds["cultural"], _economic(cfg, kinds), dev, extras, name)
    return _regression_outputs(cfg, res, "regression_dev"), _result_report(res)


def _prices(cfg):
    census = ingest.load_census(cfg["census"])
    return census.mean_over("house_price", cfg["price_years"])


def cmd_regress_house(cfg):
    kinds = read_capital_kinds(cfg["capital"])
    econ = _economic(cfg, kinds)
    res = stats.model_house_price(kinds.get("cultural", {}), econ, _prices(cfg),
                                  cultural=not cfg["economic_only"])
    return _regression_outputs(cfg, res, "regression_house"), _result_report(res)


def cmd_regress_category(cfg):
    cats = read_capital_kinds(cfg["category_capital"])
    caps = {int(k.split(":", 1)[1]): v for k, v in cats.items() if k.startswith("category:")}
    econ = _economic(cfg, read_capital_kinds(cfg["capital"]))
    rows = stats.model_category_house(caps, econ, _prices(cfg))
    path = _write_csv(_out(cfg, "category_r2.csv"), ["code", "label", "r2", "best", "note"],
                      [(r.code, tx.CATEGORIES[r.code], r.r2, int(r.best), r.note) for r in rows])
    return [path], {"best": [r.code for r in rows if r.best]}


def cmd_delta(cfg):
    census = ingest.load_census(cfg["census"])
    res = stats.delta(census.series(cfg["field"], cfg["to_year"]),
                      census.series(cfg["field"], cfg["from_year"]))
    path = _write_csv(_out(cfg, "delta.csv"), ["location", "value"], sorted(res.values.items()))
    return [path], {"n": len(res.values), "dropped": res.dropped}


def cmd_correlate(cfg):
    x = read_value_csv(cfg["x"], cfg["x_kind"], cfg["x_column"])
    y = read_value_csv(cfg["y"], cfg["y_kind"], cfg["y_column"])
    res = stats.pearson_test(x, y)
    path = _write_csv(_out(cfg, "correlation.csv"), ["r", "p", "n"], [tuple(res)])
    return [path], {"r": res.r, "p": res.p, "n": res.n}


def cmd_choropleth(cfg):
    values = read_value_csv(cfg["capital"], cfg["kind"])
    nbs = ingest.load_neighborhoods(cfg["neighborhoods"])
    path = choropleth(values, nbs, _out(cfg, cfg["out"] or f"{cfg['kind'].replace(':', '_')}.svg"),
                      title=f"{cfg['kind']} capital")
    return [path], {"locations": len(values), "polygons": len(nbs)}


HANDLERS = {cmd: globals()["cmd_" + cmd.replace("-", "_")] for cmd in COMMANDS}


def run(argv):
    """Run one subcommand; returns ``(exit_status, summary_dict)``."""
    summary = {"command": None, "status": "error"}
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("culturank: a subcommand is required")
        summary["command"] = args.command
        cfg = resolve(args)
        summary["config"] = {k: v for k, v in sorted(cfg.items())}
        os.makedirs(cfg["out_dir"], exist_ok=True)
        outputs, report = HANDLERS[args.command](cfg)
        summary.update(status="ok", outputs=outputs, report=report)
        return EXIT_OK, summary
    except UsageError as exc:
        summary["error"] = str(exc)
        return EXIT_USAGE, summary
    except (CulturankError, ValueError, KeyError) as exc:
        summary["error"] = f"{type(exc).__name__}: {exc}"
        return EXIT_VALIDATION, summary
    except OSError as exc:
        summary["error"] = f"{type(exc).__name__}: {exc}"
        return EXIT_IO, summary


def main(argv=None):
    status, summary = run(sys.argv[1:] if argv is None else argv)
    print(json.dumps(summary, sort_keys=True, default=str))
    if status != EXIT_OK:
        print(summary.get("error", ""), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
