from rest_framework import status
from rest_framework.decorators import api_view
from rest_framework.response import Response
from .models import RunManifest
from .serializers import RunManifestSerializer

@api_view(['GET'])
def run_list(request):
    """Recorded runs, newest first; ?subcommand= narrows the list"""
    runs = RunManifest.objects.all()
    subcommand = request.query_params.get('subcommand')
    if subcommand:
        runs = runs.filter(subcommand=subcommand)

    serializer = RunManifestSerializer(runs, many=True)
    return Response({
        'runs': serializer.data,
        'total_runs': runs.count()
    })

@api_view(['GET'])
def run_detail(request, run_id):
    """One run manifest with its artifact checksums"""
    try:
        run = RunManifest.objects.get(id=run_id)
    except RunManifest.DoesNotExist:
        return Response({'error': 'Run not found'}, status=status.HTTP_404_NOT_FOUND)

    return Response(RunManifestSerializer(run).data)
