import logging

logger = logging.getLogger(__name__)

INEQUALITY_NAMES = {
    'lq': 'extended LG (L_Q > 1)',
    'h1': 'stationarity H1 (H1 < 0)',
    'h2': 'stationarity H2 (H2 < 1)',
    'lg': 'standard LG (L > 2)',
}


class AlertNotifier:
    """Collects the notable events of a run and renders them as one-line summaries."""

    def __init__(self):
        self.alerts = []

    def add_violation_alert(self, name, interval):
        start, end = interval
        alert = {
            'type': 'violation',
            'name': name,
            'message': f"VIOLATION: {INEQUALITY_NAMES.get(name, name)} on "
                       f"[{start * 1e3:.6f}, {end * 1e3:.6f}] ms",
            'interval': (start, end),
        }
        self.alerts.append(alert)

    def add_divisibility_alert(self, interval):
        start, end = interval
        alert = {
            'type': 'non-divisible',
            'message': f"NON-DIVISIBLE: negative dephasing rate on "
                       f"[{start * 1e3:.6f}, {end * 1e3:.6f}] ms",
            'interval': (start, end),
        }
        self.alerts.append(alert)

    def add_singularity_alert(self, times, source='g(t)'):
        if not len(times):
            return
        alert = {
            'type': 'singular',
            'message': f"SINGULAR: {source} undefined at {len(times)} sample(s), "
                       f"first at {times[0] * 1e3:.6f} ms",
            'times': list(times),
        }
        self.alerts.append(alert)
        logger.warning(alert['message'])

    def update_with_witness_report(self, report):
        for name, intervals in report.intervals.items():
            for interval in intervals:
                self.add_violation_alert(name, interval)

    def update_with_nonmarkov_report(self, report):
        for interval in report.nm_intervals:
            self.add_divisibility_alert(interval)
        self.add_singularity_alert(report.singular_times)

    def verdict_line(self, report):
        """Single summary line for a non-Markovianity report."""
        agree = 'yes' if report.witnesses_agree else 'no'
        return (f"verdict={report.verdict} intervals={len(report.nm_intervals)} "
                f"singular={len(report.singular_times)} witnesses_agree={agree} "
                f"blp={report.blp:.17g} rate_convention={report.rate_convention} "
                f"sigma_convention={report.sigma_convention}")

    def has(self, alert_type):
        return any(alert['type'] == alert_type for alert in self.alerts)

    def messages(self):
        return [alert['message'] for alert in self.alerts]

    def clear(self):
        self.alerts = []
