import argparse

from django.core.management.base import BaseCommand

from operators.reporting import INPUT_ERRORS, invalid_input, violations_found, write_json
from wcond_modules.verification import RunConfig, run_campaign


class Command(BaseCommand):
    help = "Run a seeded verification campaign over random and scenario instances"

    def add_arguments(self, parser):
        parser.add_argument("--seed", type=int, help="Random seed")
        parser.add_argument("--instances", type=int, help="Number of random instances")
        parser.add_argument("--max-points", type=int, help="Largest number of points per instance")
        parser.add_argument("--max-atoms", type=int, help="Largest number of atoms per instance")
        parser.add_argument("--workers", type=int, help="Threads checking instances")
        parser.add_argument("--json", dest="json_path", help="Write the JSON outcome to this file")
        parser.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    def handle(self, *args, **options):
        try:
            config = RunConfig.from_settings(
                seed=options["seed"],
                instance_count=options["instances"],
                max_points=options["max_points"],
                max_atoms=options["max_atoms"],
                workers=options["workers"],
            )
        except INPUT_ERRORS as e:
            raise invalid_input(e)

        outcome = run_campaign(config, inject_fault=options["inject_fault"])
        if options["json_path"]:
            write_json(outcome.to_dict(), options["json_path"])

        self.stdout.write(
            f"{outcome.trials} trials, {len(outcome.violations)} violations, "
            f"{outcome.fixed_point_triggers} fixed-point triggers"
        )
        for text in outcome.known_violations:
            self.stdout.write(f"known: {text}")
        if outcome.finding_instances:
            self.stdout.write(f"{outcome.finding_instances} instances with findings")

        if not outcome.passed:
            for v in outcome.violations[:20]:
                self.stderr.write(f"{v.property_name}: {v.detail}")
            raise violations_found(len(outcome.violations))
