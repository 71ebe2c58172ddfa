"""Batch command-line front-end.

Subcommands: ``validate`` a catalog, ``compose`` an environment non-interactively,
``enumerate`` and ``compare`` its configurations, ``generate`` a workflow script,
and ``serve`` the HTTP API. Exit codes: 0 success, 1 validation or engine error,
2 usage error. Engine errors print as ``error: <Code>: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import codegen, composer, configurator, store
from .errors import VsoError
from .registry import EquivalenceRegistry


def _load_catalog(path: str):
    data = Path(path).read_bytes()
    catalog, _ = store.load_catalog(data, strict=True)
    return catalog


def _load_vocab(spec: str, catalog):
    if spec == "generic":
        return codegen.generic_vocabulary(catalog)
    return store.load_vocabulary(Path(spec).read_bytes())


def _load_env(path: str, catalog, *, create_id: str | None = None):
    p = Path(path)
    version = store.catalog_version(catalog)
    if not p.exists():
        if create_id is None:
            raise VsoError(f"environment file {path!r} does not exist")
        return composer.new_environment(create_id, version)
    env = store.load_environment(p.read_bytes())
    if env.catalog_version != version:
        from .errors import CatalogVersionMismatch

        raise CatalogVersionMismatch(
            f"environment {path!r} was composed against a different catalog",
            expected=version,
            got=env.catalog_version,
        )
    return env


def cmd_validate(args) -> int:
    catalog, report = store.load_catalog(Path(args.catalog).read_bytes(), strict=False)
    if not report.ok:
        print(report.render(), file=sys.stderr)
        return 1
    return 0


def cmd_compose(args) -> int:
    catalog = _load_catalog(args.catalog)
    registry = EquivalenceRegistry.from_assertions(catalog.same_as)
    env = _load_env(args.env, catalog, create_id=Path(args.env).stem)
    for image_id in args.instantiate or []:
        env, instance_id = composer.instantiate(catalog, env, image_id)
        print(f"instantiated {instance_id}")
    for spec in args.disable_model or []:
        instance_id, model_id = spec.split(":", 1)
        env = composer.toggle_model(catalog, env, instance_id, model_id, enabled=False)
        print(f"disabled {instance_id}:{model_id}")
    for spec in args.enable_model or []:
        instance_id, model_id = spec.split(":", 1)
        env = composer.toggle_model(catalog, env, instance_id, model_id, enabled=True)
        print(f"enabled {instance_id}:{model_id}")
    for spec in args.choose_method or []:
        target, method_id = spec.split("=", 1)
        instance_id, model_id = target.split(":", 1)
        env = composer.choose_method(catalog, env, instance_id, model_id, method_id)
        print(f"chose {instance_id}:{model_id}={method_id}")
    for spec in args.connect or []:
        source, target = spec.split("=", 1)
        env = composer.connect(catalog, registry, env, source, target)
        print(f"connected {source} -> {target}")
    if args.auto_connect:
        for cand in composer.suggest_connections(catalog, registry, env):
            try:
                env = composer.connect(catalog, registry, env, cand.source, cand.target)
            except VsoError:
                continue  # invalidated by an earlier application
            print(f"connected {cand.source} -> {cand.target}")
    out = args.out or args.env
    Path(out).write_bytes(store.save_environment(env))
    return 0


def cmd_enumerate(args) -> int:
    catalog = _load_catalog(args.catalog)
    env = _load_env(args.env, catalog)
    print(configurator.count_configurations(catalog, env))
    for config in configurator.enumerate_configurations(catalog, env):
        print(config.key)
    return 0


def cmd_compare(args) -> int:
    catalog = _load_catalog(args.catalog)
    env = _load_env(args.env, catalog)
    reports = configurator.compare_configurations(catalog, env, criterion=args.criterion)
    for r in reports:
        line = (
            f"{r.config.key or '<empty>'} total={r.total_time:g} "
            f"critical_path={r.critical_path_time:g} packages={r.package_count}"
        )
        if r.missing_perf:
            line += " missing_perf=" + ",".join(r.missing_perf)
        print(line)
    return 0


def cmd_generate(args) -> int:
    catalog = _load_catalog(args.catalog)
    env = _load_env(args.env, catalog)
    vocab = _load_vocab(args.vocab, catalog)
    config = None
    if args.config is not None:
        config = configurator.configuration_by_key(catalog, env, args.config)
    script = codegen.generate_script(catalog, env, vocab, config)
    if args.output == "-":
        sys.stdout.write(script.text)
    else:
        Path(args.output).write_bytes(script.text.encode("utf-8"))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    catalog = _load_catalog(args.catalog)
    vocabs = {}
    for path in args.vocab or []:
        vocab = store.load_vocabulary(Path(path).read_bytes())
        vocabs[vocab.name] = vocab
    host, _, port = args.addr.rpartition(":")
    app = create_app(catalog, vocabs)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vsoflow")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a catalog file")
    p.add_argument("catalog")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("compose", help="build or extend an environment")
    p.add_argument("--catalog", required=True)
    p.add_argument("--env", required=True)
    p.add_argument("--out", help="output path (default: overwrite --env)")
    p.add_argument("--instantiate", action="append", metavar="IMAGE")
    p.add_argument("--disable-model", action="append", metavar="INSTANCE:MODEL")
    p.add_argument("--enable-model", action="append", metavar="INSTANCE:MODEL")
    p.add_argument("--choose-method", action="append", metavar="INSTANCE:MODEL=METHOD")
    p.add_argument("--connect", action="append", metavar="SOURCE=TARGET")
    p.add_argument("--auto-connect", action="store_true")
    p.set_defaults(fn=cmd_compose)

    p = sub.add_parser("enumerate", help="count and list configurations")
    p.add_argument("--catalog", required=True)
    p.add_argument("--env", required=True)
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("compare", help="rank configurations by estimated time")
    p.add_argument("--catalog", required=True)
    p.add_argument("--env", required=True)
    p.add_argument("--criterion", choices=configurator.CRITERIA, default="total")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("generate", help="emit the workflow script")
    p.add_argument("--catalog", required=True)
    p.add_argument("--env", required=True)
    p.add_argument("--vocab", default="generic", help="vocabulary file, or 'generic'")
    p.add_argument("--config", help="configuration key or 1-based index")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--addr", default=os.environ.get("VSO_ADDR", "127.0.0.1:8750"))
    p.add_argument("--catalog", default=os.environ.get("VSO_CATALOG"))
    p.add_argument("--vocab", action="append", metavar="FILE")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve" and not args.catalog:
        parser.error("serve requires --catalog or VSO_CATALOG")
    try:
        return args.fn(args)
    except VsoError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        if getattr(exc, "report", None) is not None:
            print(exc.report.render(), file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: IO: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
