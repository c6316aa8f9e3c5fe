"""
Allocation service API
Lets a base-station controller submit a scenario and its capacity weights and get
conflict-free subchannel grants back as JSON
"""

import logging

from flask import Blueprint, current_app, jsonify, request

from grid import find_conflicts, scenario_from_dict, validate_scenario
from metrics import ALGORITHMS, summarize
from models import Allocation, AllocationError, CostTensor
from sim_harness import code_version, solve_scenario

# Configure logging
logger = logging.getLogger(__name__)

# Create Blueprint for the allocation service
allocation_api = Blueprint('allocation_api', __name__, url_prefix='/api')

# API Versioning
API_VERSION = 'v1'


def _error(message, status=400):
    return jsonify({'success': False, 'message': message}), status


@allocation_api.route('/version', methods=['GET'])
def api_version():
    """Return API and library version information"""
    return jsonify({
        'version': API_VERSION,
        'code_version': code_version(),
        'algorithms': list(ALGORITHMS)
    })


@allocation_api.route('/allocate', methods=['POST'])
def api_allocate():
    """Allocate subchannels for a scenario and its cost tensor"""
    try:
        data = request.get_json(silent=True)
        if not data or 'scenario' not in data or 'costs' not in data:
            return _error('Missing required fields: scenario, costs')

        scenario = scenario_from_dict(data['scenario'])
        violation = validate_scenario(scenario)
        if violation:
            return _error(f'Invalid scenario: {violation}')

        cost = CostTensor(values=data['costs'], bandwidth_mhz=scenario.grid.subchannel_bandwidth_mhz)
        algorithm = data.get('algorithm', 'proposed')
        allocation, diagnostics = solve_scenario(
            algorithm, scenario, cost,
            seed=data.get('seed'),
            ordering=data.get('ordering', 'constrainedness'),
            budget=current_app.config['EXHAUSTIVE_NODE_BUDGET']
        )
        logger.info(f"Allocated {allocation.assigned_count}/{scenario.num_vehicles} vehicles with {algorithm}")

        return jsonify({
            'success': True,
            'algorithm': algorithm,
            'allocation': allocation.to_dict(),
            'summary': summarize(allocation, cost).to_json(),
            'objective': allocation.objective(cost),
            'diagnostics': diagnostics
        })

    except AllocationError as e:
        return _error(f'{e.kind}: {e}')
    except ValueError as e:
        return _error(f'Malformed request: {e}')
    except Exception as e:
        logger.exception(f"Error allocating subchannels: {e}")
        return _error('Failed to allocate subchannels', 500)


@allocation_api.route('/check', methods=['POST'])
def api_check():
    """Validate a scenario and list the conflicts of an allocation against it"""
    try:
        data = request.get_json(silent=True)
        if not data or 'scenario' not in data:
            return _error('Missing required field: scenario')

        scenario = scenario_from_dict(data['scenario'])
        violation = validate_scenario(scenario)
        result = {
            'success': True,
            'violation': str(violation) if violation else None,
            'conflicts': []
        }
        if 'allocation' in data:
            allocation = Allocation.from_dict(data['allocation'])
            result['conflicts'] = [conflict.to_dict() for conflict in find_conflicts(allocation, scenario)]
        result['ok'] = violation is None and not result['conflicts']
        return jsonify(result)

    except AllocationError as e:
        return _error(f'{e.kind}: {e}')
    except Exception as e:
        logger.exception(f"Error checking allocation: {e}")
        return _error('Failed to check allocation', 500)
