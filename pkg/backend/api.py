import logging

from flask import Flask, jsonify, request

from backend.config import CONFIG_FILE, load_config, save_config
from backend.dsl import EvalContext, evaluate_expression
from backend.errors import FnsError
from backend.report import Report
from backend.suites import CaseConfig, counterexample_inputs, list_suites, run_identity_suite, t35_5_info

logger = logging.getLogger(__name__)

# Global configuration store
CONFIG = load_config(CONFIG_FILE)

# --- Flask App Initialization ---
app = Flask(__name__)

# --- Data Storage (In-memory store for recent reports) ---
REPORT_HISTORY = []
LAST_REPORT_ID = 0


# --- Helper Functions ---
def store_report(data):
    """Assigns an id to a report document and keeps the history bounded."""
    global LAST_REPORT_ID, REPORT_HISTORY
    LAST_REPORT_ID += 1
    data = dict(data, id=LAST_REPORT_ID)
    REPORT_HISTORY.append(data)
    REPORT_HISTORY = REPORT_HISTORY[-int(CONFIG['max_reports']):]
    return LAST_REPORT_ID


def get_report_by_id(report_id):
    """Linear scan; the history never exceeds max_reports."""
    for report in REPORT_HISTORY:
        if report.get('id') == report_id:
            return report
    return None


def case_config_from(data):
    return CaseConfig.from_settings(
        CONFIG,
        dimension=data.get('dim'),
        coefficient_degree=data.get('deg'),
        cases=data.get('cases'),
        seed=data.get('seed'),
    )


# --- Endpoints ---

@app.route('/api/suites', methods=['GET'])
def get_suites():
    return jsonify({"suites": list_suites()})


@app.route('/api/eval', methods=['POST'])
def eval_expression():
    """Evaluates a DSL expression, optionally with named bindings evaluated in order."""
    try:
        data = request.get_json() or {}
        if 'expr' not in data:
            return jsonify({"message": "Missing 'expr'."}), 400
        context = EvalContext.for_dimension(int(data.get('chart', 2)))
        for name, text in (data.get('env') or {}).items():
            context.environment[name] = evaluate_expression(text, context=context)
        result = evaluate_expression(data['expr'], context=context)
        return jsonify({"result": str(result), "bidegree": list(result.bidegree), "chart": str(result.chart)})
    except FnsError as e:
        return jsonify({"message": str(e)}), 400
    except Exception as e:
        logger.exception("Evaluation failed")
        return jsonify({"message": f"Evaluation failed: {e}"}), 500


@app.route('/api/verify', methods=['POST'])
def verify_suite():
    """Runs one suite and stores its report in the history."""
    try:
        data = request.get_json() or {}
        if 'suite' not in data:
            return jsonify({"message": "Missing 'suite'."}), 400
        report = run_identity_suite(data['suite'], case_config_from(data))
        document = report.to_dict()
        document['id'] = store_report(document)
        return jsonify(document)
    except FnsError as e:
        return jsonify({"message": str(e)}), 400
    except Exception as e:
        logger.exception("Verification failed")
        return jsonify({"message": f"Verification failed: {e}"}), 500


@app.route('/api/reports/ingest', methods=['POST'])
def ingest_reports():
    """Receives reports pushed by `fns verify --post`, batched or single."""
    try:
        data = request.get_json()
        documents = data['reports'] if 'reports' in data else [data]
        ids = []
        for document in documents:
            report = Report.from_dict(document)
            ids.append(store_report(report.to_dict()))
        if 'reports' in data:
            return jsonify({"message": f"Batch ingested {len(ids)} reports successfully.", "ids": ids}), 201
        return jsonify({"message": "Report ingested successfully.", "id": ids[0]}), 201
    except Exception as e:
        logger.warning("Error ingesting report: %s", e)
        return jsonify({"message": f"Ingestion failed: {e}"}), 400


@app.route('/api/reports/history', methods=['GET'])
def get_reports_history():
    return jsonify({"reports": [
        {"id": r['id'], "suite": r['suite'], "ok": r.get('ok'), "elapsed_ms": r.get('elapsed_ms')}
        for r in REPORT_HISTORY
    ]})


@app.route('/api/reports/<int:report_id>', methods=['GET'])
def get_report_details(report_id):
    report = get_report_by_id(report_id)
    if report:
        return jsonify({"message": f"Report {report_id} found.", "details": report})
    return jsonify({"message": f"Report ID {report_id} not found in recent history.", "details": None}), 404


@app.route('/api/demo/counterexample', methods=['GET'])
def get_counterexample():
    """The bracket of two lifted mixed fields that leaves the image of h."""
    try:
        inputs = counterexample_inputs()
        return jsonify({"inputs": {name: str(value) for name, value in inputs.items()}, **t35_5_info()})
    except Exception as e:
        logger.exception("Counterexample failed")
        return jsonify({"message": f"Counterexample failed: {e}"}), 500


@app.route('/api/settings', methods=['POST'])
def save_settings():
    """Endpoint to update global settings."""
    try:
        data = request.get_json()
        updated = {**CONFIG, **data}
        CaseConfig.from_settings(updated)
        CONFIG.update(data)
        save_config(CONFIG, CONFIG_FILE)
        return jsonify({"message": "Settings saved successfully.", "config": CONFIG})
    except FnsError as e:
        return jsonify({"message": f"Invalid settings: {e}"}), 400
    except Exception as e:
        return jsonify({"message": f"Failed to save settings: {e}"}), 500


if __name__ == '__main__':
    logging.basicConfig(level=CONFIG['log_level'], format="[%(asctime)s] %(levelname)s %(name)s: %(message)s",
                        datefmt="%H:%M:%S")
    print(f"--- Flask API running on http://{CONFIG['api_host']}:{CONFIG['api_port']} ---")
    app.run(host=CONFIG['api_host'], port=CONFIG['api_port'], debug=True, use_reloader=False)
