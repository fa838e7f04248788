from django.conf import settings
from django.http import JsonResponse
from django.views.decorators.http import require_http_methods
import numpy
import scipy


@require_http_methods(["GET"])
def health_check(request):
    """Simple health check endpoint"""
    return JsonResponse({
        'status': 'healthy',
        'message': 'UQS simulator backend is running',
        'dense_cap': settings.UQS_DENSE_CAP,
        'statevector_cap': settings.UQS_STATEVECTOR_CAP,
        'config_dialect': settings.UQS_CONFIG_DIALECT,
        'numpy': numpy.__version__,
        'scipy': scipy.__version__,
    })
