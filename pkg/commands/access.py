"""
Access commands: enroll, verify
"""

from auth.enrollment import LipAuthenticator
from config.config import store_path
from evalreport.calibration import resolve_threshold
from .registry import CommandGroup, arg

access_bp = CommandGroup('access')

STORE_ARGUMENT = arg('--store', default=None, help='enrollment store (default: $LBA_STORE or <data root>/enrollments.tsv)')


@access_bp.command('enroll', help='Enroll a user from one clip', arguments=[
    arg('--user', required=True),
    arg('--clip', required=True, help='LBAC clip of the authentication phrase'),
    arg('--ckpt', required=True),
    arg('--phrase', default=None, help='phrase abbreviation, e.g. pgb'),
    arg('--overwrite', action='store_true', help='replace an existing enrollment'),
    STORE_ARGUMENT,
])
def enroll(args):
    authenticator = LipAuthenticator(args.ckpt, args.store or store_path())
    record = authenticator.enroll(args.user, args.clip, phrase=args.phrase, overwrite=args.overwrite)
    print(f"✅ Enrolled {record.user_id} at {record.created_at.isoformat()}")


@access_bp.command('verify', help='Verify a login clip against an enrolled user', arguments=[
    arg('--user', required=True),
    arg('--clip', required=True),
    arg('--ckpt', required=True),
    arg('--threshold', required=True, help='threshold file from calibrate, or a number'),
    STORE_ARGUMENT,
])
def verify(args):
    threshold, _ = resolve_threshold(args.threshold)
    authenticator = LipAuthenticator(args.ckpt, args.store or store_path())
    result = authenticator.verify(args.user, args.clip, threshold)
    decision = '✅ ACCEPT' if result['accept'] else '❌ REJECT'
    print(f"{decision} score={result['score']:.6f} threshold={threshold:.6f}")
