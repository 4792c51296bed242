from django.core.management.base import BaseCommand

from operators.reporting import INPUT_ERRORS, dumps, invalid_input, violations_found, write_json
from wcond_modules.classify import classify_all
from wcond_modules.instances import load_instance
from wcond_modules.verification import RunConfig, parse_p_grid


class Command(BaseCommand):
    help = "Classify an operator instance into the partial normality classes"

    def add_arguments(self, parser):
        parser.add_argument("instance", help="Path to an instance JSON file")
        parser.add_argument("--tol", type=float, help="Comparison tolerance")
        parser.add_argument("--p", help="Comma-separated exponents, e.g. 0.5,1,2,3.7")
        parser.add_argument("--max-power", type=int, help="Highest power for the normaloid test")
        parser.add_argument("--json", dest="json_path", help="Write the JSON report to this file")

    def handle(self, *args, **options):
        try:
            T = load_instance(options["instance"])
            config = RunConfig.from_settings(
                tol=options["tol"],
                p_grid=parse_p_grid(options["p"]),
                max_power=options["max_power"],
            )
        except INPUT_ERRORS as e:
            raise invalid_input(e)

        report = classify_all(T, config)
        data = report.to_dict()
        if options["json_path"]:
            write_json(data, options["json_path"])

        for label, verdict in report.summary().items():
            self.stdout.write(f"{label:<28} {verdict}")
        for text in report.findings:
            self.stdout.write(f"finding: {text}")
        for text in report.notes:
            self.stdout.write(f"note: {text}")
        if options["verbosity"] > 1:
            self.stdout.write(dumps(data))

        if not report.passed:
            for text in report.violations + report.errors:
                self.stderr.write(text)
            raise violations_found(len(report.violations) + len(report.errors))
